#pragma once

// Recovery metrics and the data-dependent constants of the recovery bounds.

#include "schatten/core.hpp"
#include "schatten/norms.hpp"

#include <numeric>
#include <optional>

namespace schatten {

struct EvalReport {
    std::optional<double> rse;
    std::optional<double> rmse;
    std::optional<double> auc;
    std::optional<double> c1;
    std::optional<double> c3;
    std::optional<double> c3_lower_bound;
};

/// ||X - X0||_F / ||X0||_F
inline double rse(const DenseMatrix &x, const DenseMatrix &x0) {
    if (x.rows() != x0.rows() || x.cols() != x0.cols())
        throw std::invalid_argument("rse: dimension mismatch " + dims_string(x.rows(), x.cols()) +
                                    " vs " + dims_string(x0.rows(), x0.cols()));
    const double denom = x0.norm();
    if (denom == 0.0)
        throw std::invalid_argument("rse: reference matrix is zero");
    return (x - x0).norm() / denom;
}

inline double rmse(const Vector &predictions, const Vector &truth) {
    if (predictions.size() != truth.size())
        throw std::invalid_argument("rmse: length mismatch");
    if (truth.size() == 0)
        throw std::invalid_argument("rmse: empty test set");
    return std::sqrt((predictions - truth).squaredNorm() / static_cast<double>(truth.size()));
}

/// Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 * P(tie), computed from
/// mid-ranks in O(n log n).
inline double auc(const Vector &scores, const std::vector<bool> &labels) {
    if (static_cast<std::size_t>(scores.size()) != labels.size())
        throw std::invalid_argument("auc: scores and labels differ in length");
    const std::size_t n = labels.size();
    const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("auc: labels must contain both classes");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores(static_cast<Index>(a)) < scores(static_cast<Index>(b));
    });
    double pos_rank_sum = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && scores(static_cast<Index>(order[j + 1])) ==
                                scores(static_cast<Index>(order[i])))
            ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]])
                pos_rank_sum += mid_rank;
        i = j + 1;
    }
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

/// F1 score of a predicted support against the true one.
inline double support_f1(const std::vector<bool> &predicted, const std::vector<bool> &truth) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("support_f1: length mismatch");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predicted[i] && truth[i])
            ++tp;
        else if (predicted[i])
            ++fp;
        else if (truth[i])
            ++fn;
    }
    if (tp == 0)
        return (fp == 0 && fn == 0) ? 1.0 : 0.0;
    const double t = static_cast<double>(tp);
    return 2.0 * t / (2.0 * t + static_cast<double>(fp + fn));
}

// ---------------------------------------------------------------------------
// Measurement operators for C1. P_Omega is the sampling operator; a dense
// operator maps vec(X) (row-major) through an l x (m n) matrix.

class SamplingOperator {
  public:
    explicit SamplingOperator(ObservationSet omega) : omega_(std::move(omega)) {}
    Index rows() const { return omega_.host_rows(); }
    Index cols() const { return omega_.host_cols(); }
    Vector apply(const DenseMatrix &x) const { return project_omega(x, omega_); }
    DenseMatrix adjoint(const Vector &y) const { return scatter_omega(omega_, y); }

  private:
    ObservationSet omega_;
};

class DenseOperator {
  public:
    DenseOperator(Index rows, Index cols, Eigen::MatrixXd matrix)
        : rows_(rows), cols_(cols), matrix_(std::move(matrix)) {
        if (matrix_.cols() != rows * cols)
            throw std::invalid_argument("DenseOperator: matrix width must equal rows*cols");
    }
    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Vector apply(const DenseMatrix &x) const {
        return matrix_ * Eigen::Map<const Vector>(x.data(), x.size());
    }
    DenseMatrix adjoint(const Vector &y) const {
        const Vector flat = matrix_.transpose() * y;
        return Eigen::Map<const DenseMatrix>(flat.data(), rows_, cols_);
    }

  private:
    Index rows_;
    Index cols_;
    Eigen::MatrixXd matrix_;
};

/// ||A^*(b - A(U V^T)) V||_F / ||b - A(U V^T)||_2
template <class Operator>
double c1_constant(const Operator &op, const Vector &b, const FactorPair &factors) {
    const Vector residual = b - op.apply(factors.product());
    const double denom = residual.norm();
    if (denom == 0.0)
        throw std::domain_error("c1_constant: zero residual, constant undefined");
    return (op.adjoint(residual) * factors.v).norm() / denom;
}

/// ||P_Omega(D - U V^T) V||_F / ||P_Omega(D - U V^T)||_F, with `observed`
/// carrying P_Omega(D).
inline double c3_constant(const ObservationSet &observed, const FactorPair &factors) {
    const Vector residual = observed.values() - sample_product(factors.u, factors.v, observed);
    const double denom = residual.norm();
    if (denom == 0.0)
        throw std::domain_error("c3_constant: zero residual, constant undefined");
    return scatter_times(observed, residual, factors.v).norm() / denom;
}

/// sqrt(mu) / (2 sqrt(2 gamma)) with gamma = ||P_Omega(D)||_F^2 / (2 mu).
inline double c3_lower_bound(const ObservationSet &observed, double mu) {
    const double gamma = observed.values().squaredNorm() / (2.0 * mu);
    return std::sqrt(mu) / (2.0 * std::sqrt(2.0 * gamma));
}

} // namespace schatten
