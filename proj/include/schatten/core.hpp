#pragma once

// Dense linear-algebra primitives, observation sets and the proximal
// thresholding operators shared by every solver.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace schatten {

using Index = Eigen::Index;
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Raised when a decomposition or an iteration produces non-finite values.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline std::string dims_string(Index rows, Index cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

template <class Derived>
bool all_finite(const Eigen::DenseBase<Derived> &m) {
    return m.derived().array().isFinite().all();
}

template <class Derived>
void require_finite(const Eigen::DenseBase<Derived> &m, const char *what) {
    if (!all_finite(m))
        throw std::invalid_argument(std::string(what) + ": matrix " +
                                    dims_string(m.rows(), m.cols()) +
                                    " contains non-finite entries");
}

// ---------------------------------------------------------------------------
// SVD

/// Thin SVD, k = min(rows, cols). Columns of `left` and `right` are
/// orthonormal and `singulars` is non-increasing.
struct SvdResult {
    DenseMatrix left;
    Vector singulars;
    DenseMatrix right;

    DenseMatrix reconstruct() const {
        return left * singulars.asDiagonal() * right.transpose();
    }
};

inline SvdResult thin_svd(const DenseMatrix &m) {
    require_finite(m, "thin_svd");
    const Index k = std::min(m.rows(), m.cols());
    if (k == 0)
        return {DenseMatrix(m.rows(), 0), Vector(0), DenseMatrix(m.cols(), 0)};
    Eigen::MatrixXd colmajor = m;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(colmajor, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success || !all_finite(svd.singularValues()))
        throw NumericalError("thin_svd: decomposition failed for " +
                             dims_string(m.rows(), m.cols()) + " matrix");
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

/// Singular values only, non-increasing.
inline Vector singular_values(const DenseMatrix &m) {
    require_finite(m, "singular_values");
    if (std::min(m.rows(), m.cols()) == 0)
        return Vector(0);
    Eigen::MatrixXd colmajor = m;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(colmajor);
    if (svd.info() != Eigen::Success)
        throw NumericalError("singular_values: decomposition failed for " +
                             dims_string(m.rows(), m.cols()) + " matrix");
    return svd.singularValues();
}

inline double spectral_norm(const DenseMatrix &m) {
    const Vector s = singular_values(m);
    return s.size() == 0 ? 0.0 : s(0);
}

// ---------------------------------------------------------------------------
// Proximal operators

/// svt output together with the shrunk spectrum, so callers can read the
/// trace norm of the result without another decomposition.
struct ShrinkResult {
    DenseMatrix value;
    Vector singulars;

    double trace_norm() const { return singulars.sum(); }
};

inline ShrinkResult shrink_singular_values(const DenseMatrix &m, double tau) {
    if (!(tau >= 0.0))
        throw std::invalid_argument("svt: threshold must be non-negative, got " +
                                    std::to_string(tau));
    SvdResult svd = thin_svd(m);
    Vector shrunk = (svd.singulars.array() - tau).cwiseMax(0.0).matrix();
    Index keep = 0;
    while (keep < shrunk.size() && shrunk(keep) > 0.0)
        ++keep;
    DenseMatrix out = DenseMatrix::Zero(m.rows(), m.cols());
    if (keep > 0)
        out = svd.left.leftCols(keep) * shrunk.head(keep).asDiagonal() *
              svd.right.leftCols(keep).transpose();
    return {std::move(out), std::move(shrunk)};
}

/// Matrix shrinkage: argmin_X tau*||X||_tr + 0.5*||X - M||_F^2.
inline DenseMatrix svt(const DenseMatrix &m, double tau) {
    return shrink_singular_values(m, tau).value;
}

inline double soft_threshold(double y, double tau) {
    if (!(tau >= 0.0))
        throw std::invalid_argument("soft_threshold: threshold must be non-negative");
    const double mag = std::abs(y) - tau;
    return mag > 0.0 ? std::copysign(mag, y) : 0.0;
}

inline Vector soft_threshold(const Vector &y, double tau) {
    if (!(tau >= 0.0))
        throw std::invalid_argument("soft_threshold: threshold must be non-negative");
    return y.unaryExpr([tau](double v) { return soft_threshold(v, tau); });
}

/// Cut-off below which the half-thresholding operator returns zero.
inline double half_threshold_cutoff(double lambda) {
    return std::cbrt(54.0) / 4.0 * std::pow(lambda, 2.0 / 3.0);
}

/// Closed-form minimizer of (y - x)^2 + lambda*|x|^(1/2). Inputs exactly on
/// the cut-off map to zero.
inline double half_threshold(double y, double lambda) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("half_threshold: lambda must be positive, got " +
                                    std::to_string(lambda));
    const double mag = std::abs(y);
    if (mag <= half_threshold_cutoff(lambda))
        return 0.0;
    const double arg = std::clamp(lambda / 8.0 * std::pow(mag / 3.0, -1.5), -1.0, 1.0);
    const double phi = std::acos(arg);
    return 2.0 / 3.0 * y * (1.0 + std::cos(2.0 * std::numbers::pi / 3.0 - 2.0 / 3.0 * phi));
}

inline Vector half_threshold(const Vector &y, double lambda) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("half_threshold: lambda must be positive");
    return y.unaryExpr([lambda](double v) { return half_threshold(v, lambda); });
}

// ---------------------------------------------------------------------------
// Observation sets

struct Entry {
    Index row;
    Index col;
    double value;
};

/// A set of observed cells of a host matrix, stored in row-major sorted order.
/// This order is the canonical coordinate order of every measurement vector.
class ObservationSet {
  public:
    ObservationSet() = default;

    ObservationSet(Index host_rows, Index host_cols, std::vector<Entry> entries)
        : host_rows_(host_rows), host_cols_(host_cols) {
        if (host_rows < 0 || host_cols < 0)
            throw std::invalid_argument("ObservationSet: negative host dimensions");
        std::sort(entries.begin(), entries.end(), [](const Entry &a, const Entry &b) {
            return std::tie(a.row, a.col) < std::tie(b.row, b.col);
        });
        rows_.reserve(entries.size());
        cols_.reserve(entries.size());
        values_.resize(static_cast<Index>(entries.size()));
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const Entry &e = entries[i];
            if (e.row < 0 || e.row >= host_rows || e.col < 0 || e.col >= host_cols)
                throw std::invalid_argument("ObservationSet: entry (" + std::to_string(e.row) +
                                            ", " + std::to_string(e.col) +
                                            ") outside host " +
                                            dims_string(host_rows, host_cols));
            if (i > 0 && entries[i - 1].row == e.row && entries[i - 1].col == e.col)
                throw std::invalid_argument("ObservationSet: duplicate entry (" +
                                            std::to_string(e.row) + ", " +
                                            std::to_string(e.col) + ")");
            if (!std::isfinite(e.value))
                throw std::invalid_argument("ObservationSet: non-finite value");
            rows_.push_back(e.row);
            cols_.push_back(e.col);
            values_(static_cast<Index>(i)) = e.value;
        }
    }

    /// Every cell of `m`, observed.
    static ObservationSet full(const DenseMatrix &m) {
        std::vector<Entry> entries;
        entries.reserve(static_cast<std::size_t>(m.size()));
        for (Index i = 0; i < m.rows(); ++i)
            for (Index j = 0; j < m.cols(); ++j)
                entries.push_back({i, j, m(i, j)});
        return ObservationSet(m.rows(), m.cols(), std::move(entries));
    }

    /// Same support, new values (in canonical order).
    ObservationSet with_values(const Vector &values) const {
        if (values.size() != size())
            throw std::invalid_argument("ObservationSet::with_values: length mismatch");
        ObservationSet out = *this;
        out.values_ = values;
        return out;
    }

    Index host_rows() const { return host_rows_; }
    Index host_cols() const { return host_cols_; }
    Index size() const { return static_cast<Index>(rows_.size()); }
    bool empty() const { return rows_.empty(); }
    Index row(Index k) const { return rows_[static_cast<std::size_t>(k)]; }
    Index col(Index k) const { return cols_[static_cast<std::size_t>(k)]; }
    const Vector &values() const { return values_; }

    std::vector<Entry> entries() const {
        std::vector<Entry> out;
        out.reserve(rows_.size());
        for (Index k = 0; k < size(); ++k)
            out.push_back({row(k), col(k), values_(k)});
        return out;
    }

    bool same_support(const ObservationSet &other) const {
        return host_rows_ == other.host_rows_ && host_cols_ == other.host_cols_ &&
               rows_ == other.rows_ && cols_ == other.cols_;
    }

  private:
    Index host_rows_ = 0;
    Index host_cols_ = 0;
    std::vector<Index> rows_;
    std::vector<Index> cols_;
    Vector values_;
};

/// P_Omega: entries of `m` at the observed cells, canonical order.
inline Vector project_omega(const DenseMatrix &m, const ObservationSet &omega) {
    if (omega.host_rows() > m.rows() || omega.host_cols() > m.cols())
        throw std::invalid_argument("project_omega: mask host " +
                                    dims_string(omega.host_rows(), omega.host_cols()) +
                                    " exceeds matrix " + dims_string(m.rows(), m.cols()));
    Vector out(omega.size());
    for (Index k = 0; k < omega.size(); ++k)
        out(k) = m(omega.row(k), omega.col(k));
    return out;
}

/// Adjoint of project_omega: zero-filled host matrix carrying `v` on Omega.
inline DenseMatrix scatter_omega(const ObservationSet &omega, const Vector &v) {
    if (v.size() != omega.size())
        throw std::invalid_argument("scatter_omega: vector length " + std::to_string(v.size()) +
                                    " != |Omega| " + std::to_string(omega.size()));
    DenseMatrix out = DenseMatrix::Zero(omega.host_rows(), omega.host_cols());
    for (Index k = 0; k < omega.size(); ++k)
        out(omega.row(k), omega.col(k)) = v(k);
    return out;
}

inline DenseMatrix zero_filled(const ObservationSet &omega) {
    return scatter_omega(omega, omega.values());
}

/// (L * R^T) sampled on Omega, O(|Omega| d).
inline Vector sample_product(const DenseMatrix &left, const DenseMatrix &right,
                             const ObservationSet &omega) {
    Vector out(omega.size());
    for (Index k = 0; k < omega.size(); ++k)
        out(k) = left.row(omega.row(k)).dot(right.row(omega.col(k)));
    return out;
}

/// P_Omega^*(r) * B, where B has host_cols rows.
inline DenseMatrix scatter_times(const ObservationSet &omega, const Vector &r,
                                 const DenseMatrix &b) {
    DenseMatrix out = DenseMatrix::Zero(omega.host_rows(), b.cols());
    for (Index k = 0; k < omega.size(); ++k)
        out.row(omega.row(k)) += r(k) * b.row(omega.col(k));
    return out;
}

/// P_Omega^*(r)^T * B, where B has host_rows rows.
inline DenseMatrix scatter_transpose_times(const ObservationSet &omega, const Vector &r,
                                           const DenseMatrix &b) {
    DenseMatrix out = DenseMatrix::Zero(omega.host_cols(), b.cols());
    for (Index k = 0; k < omega.size(); ++k)
        out.row(omega.col(k)) += r(k) * b.row(omega.row(k));
    return out;
}

// ---------------------------------------------------------------------------
// Text formats
//
// Dense matrix:    "rows cols" then one line of cols reals per row.
// ObservationSet:  "rows cols count" then count lines "i j value", 0-based.

inline void write_matrix(std::ostream &os, const DenseMatrix &m) {
    os << m.rows() << ' ' << m.cols() << '\n';
    os << std::setprecision(17);
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j)
                os << ' ';
            os << m(i, j);
        }
        os << '\n';
    }
}

inline DenseMatrix read_matrix(std::istream &is) {
    long long rows = -1, cols = -1;
    if (!(is >> rows >> cols) || rows < 0 || cols < 0)
        throw std::runtime_error("read_matrix: bad header, expected \"rows cols\"");
    DenseMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            if (!(is >> m(i, j)))
                throw std::runtime_error("read_matrix: truncated data at row " +
                                         std::to_string(i) + ", col " + std::to_string(j));
    require_finite(m, "read_matrix");
    return m;
}

inline void write_observations(std::ostream &os, const ObservationSet &omega) {
    os << omega.host_rows() << ' ' << omega.host_cols() << ' ' << omega.size() << '\n';
    os << std::setprecision(17);
    for (Index k = 0; k < omega.size(); ++k)
        os << omega.row(k) << ' ' << omega.col(k) << ' ' << omega.values()(k) << '\n';
}

inline ObservationSet read_observations(std::istream &is) {
    long long rows = -1, cols = -1, count = -1;
    if (!(is >> rows >> cols >> count) || rows < 0 || cols < 0 || count < 0)
        throw std::runtime_error("read_observations: bad header, expected \"rows cols count\"");
    if (count > rows * cols)
        throw std::runtime_error("read_observations: count exceeds rows*cols");
    std::vector<Entry> entries(static_cast<std::size_t>(count));
    for (auto &e : entries) {
        long long i = 0, j = 0;
        if (!(is >> i >> j >> e.value))
            throw std::runtime_error("read_observations: truncated entry list");
        e.row = i;
        e.col = j;
    }
    return ObservationSet(rows, cols, std::move(entries));
}

inline DenseMatrix load_matrix_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open matrix file: " + path);
    return read_matrix(in);
}

inline ObservationSet load_observation_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open observation file: " + path);
    return read_observations(in);
}

} // namespace schatten
