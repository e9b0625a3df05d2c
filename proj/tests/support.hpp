#pragma once

// Independent oracles shared by the test suites. Nothing here calls the
// library's SVD, thresholding or norm code.

#include "schatten/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using schatten::DenseMatrix;
using schatten::Index;
using schatten::Vector;

inline DenseMatrix gaussian(Index rows, Index cols, std::mt19937_64 &rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    DenseMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            m(i, j) = nd(rng);
    return m;
}

/// m x k matrix with orthonormal columns from Householder QR of a Gaussian.
inline DenseMatrix orthonormal(Index m, Index k, std::mt19937_64 &rng) {
    const Eigen::MatrixXd g = gaussian(m, k, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, k);
    return q;
}

/// A matrix whose singular values are exactly `s` (up to rounding of the
/// product), built from random orthonormal factors.
struct KnownSpectrum {
    DenseMatrix x;
    Vector s; // non-increasing
};

inline KnownSpectrum known_spectrum(Index m, Index n, Vector s, std::mt19937_64 &rng) {
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    const Index k = s.size();
    const DenseMatrix l = orthonormal(m, k, rng);
    const DenseMatrix r = orthonormal(n, k, rng);
    return {l * s.asDiagonal() * r.transpose(), s};
}

/// Rank-r matrix with singular values log-uniform on [lo, hi].
inline KnownSpectrum random_known(Index m, Index n, Index r, std::mt19937_64 &rng,
                                  double lo = 1e-2, double hi = 1e2) {
    std::uniform_real_distribution<double> u(std::log10(lo), std::log10(hi));
    Vector s(r);
    for (Index i = 0; i < r; ++i)
        s(i) = std::pow(10.0, u(rng));
    return known_spectrum(m, n, s, rng);
}

inline double schatten(const Vector &s, double p) {
    double acc = 0.0;
    for (Index i = 0; i < s.size(); ++i)
        acc += std::pow(s(i), p);
    return acc == 0.0 ? 0.0 : std::pow(acc, 1.0 / p);
}

/// Singular values from the symmetric eigenproblem of X^T X (or X X^T);
/// accurate for well-conditioned inputs only.
inline Vector gram_singular_values(const DenseMatrix &x) {
    const Eigen::MatrixXd g = x.rows() >= x.cols() ? Eigen::MatrixXd(x.transpose() * x)
                                                   : Eigen::MatrixXd(x * x.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    Vector ev = es.eigenvalues().reverse();
    return ev.cwiseMax(0.0).cwiseSqrt();
}

/// Largest singular value by power iteration on X^T X.
inline double power_spectral_norm(const DenseMatrix &x, int iters = 2000) {
    if (x.size() == 0 || x.norm() == 0.0)
        return 0.0;
    Vector v = Vector::Ones(x.cols()).normalized();
    double est = 0.0;
    for (int i = 0; i < iters; ++i) {
        Vector w = x.transpose() * (x * v);
        const double nw = w.norm();
        if (nw == 0.0)
            return 0.0;
        v = w / nw;
        est = std::sqrt(nw);
    }
    return est;
}

/// Minimizer of f over [lo, hi] by exhaustive scan at step h: a coarse pass
/// at step 1000 h locates every basin, then each coarse local minimum and
/// the points in `pins` are refined at step h. Grid points are integer
/// multiples of h, so 0 is always on the grid.
inline double grid_minimizer(const std::function<double(double)> &f, double lo, double hi,
                             double h = 1e-6, std::vector<double> pins = {0.0}) {
    const double coarse = 1000.0 * h;
    const auto c_lo = static_cast<long long>(std::floor(lo / coarse));
    const auto c_hi = static_cast<long long>(std::ceil(hi / coarse));
    std::vector<double> vals;
    for (long long k = c_lo; k <= c_hi; ++k)
        vals.push_back(f(static_cast<double>(k) * coarse));
    std::vector<double> centers = std::move(pins);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const bool left = i == 0 || vals[i] <= vals[i - 1];
        const bool right = i + 1 == vals.size() || vals[i] <= vals[i + 1];
        if (left && right)
            centers.push_back(static_cast<double>(c_lo + static_cast<long long>(i)) * coarse);
    }
    double best_x = 0.0, best_f = std::numeric_limits<double>::infinity();
    for (double c : centers) {
        const auto k0 = static_cast<long long>(std::llround((c - 2.0 * coarse) / h));
        const auto k1 = static_cast<long long>(std::llround((c + 2.0 * coarse) / h));
        for (long long k = k0; k <= k1; ++k) {
            const double x = static_cast<double>(k) * h;
            if (x < lo - h / 2 || x > hi + h / 2)
                continue;
            const double v = f(x);
            if (v < best_f) {
                best_f = v;
                best_x = x;
            }
        }
    }
    return best_x;
}

/// Brute-force Mann-Whitney AUC over all (positive, negative) pairs.
inline double all_pairs_auc(const Vector &scores, const std::vector<bool> &labels) {
    double credit = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i])
            continue;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j])
                continue;
            const double a = scores(static_cast<Index>(i)), b = scores(static_cast<Index>(j));
            credit += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
            pairs += 1.0;
        }
    }
    return credit / pairs;
}

/// Ratings file from a rank-r model: rating = offset + P Q^T / sqrt(r) + noise
/// on `count` distinct random cells, written as "user::item::rating".
inline void write_synthetic_ratings(const std::string &path, Index users, Index items,
                                    Index count, Index r, double noise, std::uint64_t seed,
                                    double offset = 3.0, const char *sep = "::") {
    std::mt19937_64 rng(seed);
    const DenseMatrix p = gaussian(users, r, rng);
    const DenseMatrix q = gaussian(items, r, rng);
    std::vector<Index> cells(static_cast<std::size_t>(users * items));
    for (std::size_t k = 0; k < cells.size(); ++k)
        cells[k] = static_cast<Index>(k);
    for (Index k = 0; k < count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), cells.size() - 1);
        std::swap(cells[static_cast<std::size_t>(k)], cells[pick(rng)]);
    }
    std::normal_distribution<double> nd(0.0, 1.0);
    std::ofstream out(path);
    out.precision(6);
    for (Index k = 0; k < count; ++k) {
        const Index u = cells[static_cast<std::size_t>(k)] / items;
        const Index i = cells[static_cast<std::size_t>(k)] % items;
        const double value = offset + p.row(u).dot(q.row(i)) / std::sqrt(static_cast<double>(r)) +
                             noise * nd(rng);
        out << "u" << u << sep << "i" << i << sep << value << "\n";
    }
}

inline std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace oracle
