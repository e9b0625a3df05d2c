#pragma once

// Schatten quasi-norms and the bi-trace / tri-trace factor constructions.

#include "schatten/core.hpp"

#include <array>

namespace schatten {

/// X ~ U V^T with U: m x d, V: n x d.
struct FactorPair {
    DenseMatrix u;
    DenseMatrix v;

    FactorPair() = default;
    FactorPair(DenseMatrix u_, DenseMatrix v_) : u(std::move(u_)), v(std::move(v_)) {
        if (u.cols() != v.cols() || u.cols() < 1)
            throw std::invalid_argument("FactorPair: inner ranks differ or are zero (" +
                                        std::to_string(u.cols()) + ", " +
                                        std::to_string(v.cols()) + ")");
    }

    Index rank() const { return u.cols(); }
    DenseMatrix product() const { return u * v.transpose(); }
};

/// X ~ U V W^T with U: m x d, V: d x d, W: n x d.
struct FactorTriple {
    DenseMatrix u;
    DenseMatrix v;
    DenseMatrix w;

    FactorTriple() = default;
    FactorTriple(DenseMatrix u_, DenseMatrix v_, DenseMatrix w_)
        : u(std::move(u_)), v(std::move(v_)), w(std::move(w_)) {
        const Index d = u.cols();
        if (d < 1 || v.rows() != d || v.cols() != d || w.cols() != d)
            throw std::invalid_argument("FactorTriple: inconsistent inner dimensions");
    }

    Index rank() const { return u.cols(); }
    DenseMatrix product() const { return u * v * w.transpose(); }
};

inline double schatten_from_singulars(const Vector &s, double p) {
    if (!(p > 0.0 && p <= 2.0))
        throw std::invalid_argument("schatten_quasi_norm: p must lie in (0, 2], got " +
                                    std::to_string(p));
    double acc = 0.0;
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) > 0.0)
            acc += std::pow(s(i), p);
    return acc == 0.0 ? 0.0 : std::pow(acc, 1.0 / p);
}

/// Zeroes singular values at or below max(m, n) * eps * sigma_1. These are
/// rounding noise of an exactly rank-deficient input, and fractional powers
/// would inflate them (cbrt(1e-15) = 1e-5).
inline Vector clean_singulars(Vector s, Index rows, Index cols) {
    if (s.size() == 0)
        return s;
    const double tol = static_cast<double>(std::max(rows, cols)) *
                       std::numeric_limits<double>::epsilon() * s(0);
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) <= tol)
            s(i) = 0.0;
    return s;
}

/// (sum_i sigma_i^p)^(1/p), p in (0, 2].
inline double schatten_quasi_norm(const DenseMatrix &x, double p) {
    if (!(p > 0.0 && p <= 2.0))
        throw std::invalid_argument("schatten_quasi_norm: p must lie in (0, 2], got " +
                                    std::to_string(p));
    return schatten_from_singulars(clean_singulars(singular_values(x), x.rows(), x.cols()), p);
}

inline double trace_norm(const DenseMatrix &x) { return singular_values(x).sum(); }

inline double fro_norm(const DenseMatrix &x) { return x.norm(); }

/// Balanced two-factor split U = L S^(1/2), V = R S^(1/2) of the thin SVD.
inline FactorPair balanced_pair(const DenseMatrix &x) {
    SvdResult svd = thin_svd(x);
    if (svd.singulars.size() == 0)
        throw std::invalid_argument("balanced_pair: empty matrix");
    const Vector root = clean_singulars(svd.singulars, x.rows(), x.cols()).cwiseSqrt();
    return {svd.left * root.asDiagonal(), svd.right * root.asDiagonal()};
}

/// Balanced three-factor split U = L S^(1/3), V = diag(S^(1/3)), W = R S^(1/3).
inline FactorTriple balanced_triple(const DenseMatrix &x) {
    SvdResult svd = thin_svd(x);
    if (svd.singulars.size() == 0)
        throw std::invalid_argument("balanced_triple: empty matrix");
    const Vector root = clean_singulars(svd.singulars, x.rows(), x.cols())
                            .unaryExpr([](double s) { return std::cbrt(s); });
    DenseMatrix middle = root.asDiagonal();
    return {svd.left * root.asDiagonal(), std::move(middle), svd.right * root.asDiagonal()};
}

/// ||U*||_tr * ||V*||_tr for the balanced split; equals the Schatten-1/2 value.
inline double bi_trace(const DenseMatrix &x) {
    if (x.size() == 0)
        return 0.0;
    const FactorPair fp = balanced_pair(x);
    return trace_norm(fp.u) * trace_norm(fp.v);
}

/// ||U*||_tr * ||V*||_tr * ||W*||_tr for the balanced split; equals the
/// Schatten-1/3 value.
inline double tri_trace(const DenseMatrix &x) {
    if (x.size() == 0)
        return 0.0;
    const FactorTriple ft = balanced_triple(x);
    return trace_norm(ft.u) * trace_norm(ft.v) * trace_norm(ft.w);
}

/// ((||U||_tr + ||V||_tr) / 2)^2, an upper bound on the Schatten-1/2 value of U V^T.
inline double bi_trace_surrogate(const FactorPair &fp) {
    const double mean = 0.5 * (trace_norm(fp.u) + trace_norm(fp.v));
    return mean * mean;
}

/// ((||U||_tr + ||V||_tr + ||W||_tr) / 3)^3.
inline double tri_trace_surrogate(const FactorTriple &ft) {
    const double mean = (trace_norm(ft.u) + trace_norm(ft.v) + trace_norm(ft.w)) / 3.0;
    return mean * mean * mean;
}

/// Singular values above rel_cutoff * sigma_1.
inline Index numerical_rank(const Vector &singulars, double rel_cutoff = 1e-10) {
    if (singulars.size() == 0 || singulars(0) <= 0.0)
        return 0;
    const double cut = rel_cutoff * singulars(0);
    Index r = 0;
    for (Index i = 0; i < singulars.size(); ++i)
        if (singulars(i) > cut)
            ++r;
    return r;
}

/// The comparison chain between trace, bi-trace and tri-trace norms at a
/// given numerical rank r.
struct NormChain {
    double trace = 0.0;
    double bi_trace = 0.0;
    double tri_trace = 0.0;
    double rank_sq_trace = 0.0; // r^2 * trace
    Index rank = 0;

    std::array<double, 4> tuple() const { return {trace, bi_trace, tri_trace, rank_sq_trace}; }

    /// Signed slacks of trace <= bi <= tri <= r^2 trace and bi <= r trace;
    /// all non-negative when the chain holds.
    std::array<double, 4> slacks() const {
        const double r = static_cast<double>(rank);
        return {bi_trace - trace, tri_trace - bi_trace, rank_sq_trace - tri_trace,
                r * trace - bi_trace};
    }

    bool holds(double rel_tol) const {
        const double scale = 1.0 + rank_sq_trace;
        for (double s : slacks())
            if (s < -rel_tol * scale)
                return false;
        return true;
    }
};

/// Evaluates the chain on the singular values above the numerical-rank
/// cut-off rel_cutoff * sigma_1; smaller values are treated as zero.
inline NormChain norm_chain(const DenseMatrix &x, double rel_cutoff = 1e-10) {
    const Vector s = singular_values(x);
    NormChain out;
    out.rank = numerical_rank(s, rel_cutoff);
    const Vector kept = s.head(out.rank);
    out.trace = kept.sum();
    out.bi_trace = out.rank ? schatten_from_singulars(kept, 0.5) : 0.0;
    out.tri_trace = out.rank ? schatten_from_singulars(kept, 1.0 / 3.0) : 0.0;
    out.rank_sq_trace = static_cast<double>(out.rank * out.rank) * out.trace;
    return out;
}

} // namespace schatten
