#pragma once

// PALM for smooth-loss completion and LADM for constrained / robust recovery,
// both with bi-trace and tri-trace penalties, plus a trace-norm baseline.
//
// Both algorithms share one block step: linearize the quadratic coupling
// term 0.5*||A(X) - c||^2 at the current block, add a proximal term with
// weight t (a Lipschitz bound of the block gradient), and apply svt. The
// block penalty is ||B||_tr / q with q the number of factors, so the svt
// threshold is 1 / (q * coupling * t), where coupling is 1/mu for PALM and
// beta_k for LADM.

#include "schatten/core.hpp"
#include "schatten/norms.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string_view>

namespace schatten {

enum class Loss { L1, LHalf };
enum class Status { Converged, MaxIters };
enum class InitMode { GaussianScaled, SpectralWarm };

inline std::string_view to_string(Loss l) { return l == Loss::L1 ? "l1" : "lhalf"; }
inline std::string_view to_string(Status s) {
    return s == Status::Converged ? "converged" : "max_iters";
}
inline std::string_view to_string(InitMode m) {
    return m == InitMode::GaussianScaled ? "gaussian" : "spectral";
}

struct PalmConfig {
    Index rank = 1;
    double mu = 1.0;
    int max_iters = 500;
    double rel_tol = 1e-4;
    double step_safety = 1.0;
    std::uint64_t seed = 0;
    double t_min = 1e-8;
    InitMode init = InitMode::SpectralWarm;

    void validate() const {
        if (rank < 1)
            throw std::invalid_argument("PalmConfig: rank must be >= 1");
        if (!(mu > 0.0))
            throw std::invalid_argument("PalmConfig: mu must be positive");
        if (max_iters < 1)
            throw std::invalid_argument("PalmConfig: max_iters must be >= 1");
        if (!(rel_tol > 0.0))
            throw std::invalid_argument("PalmConfig: rel_tol must be positive");
        if (!(step_safety >= 1.0))
            throw std::invalid_argument("PalmConfig: step_safety must be >= 1");
        if (!(t_min > 0.0))
            throw std::invalid_argument("PalmConfig: t_min must be positive");
    }
};

struct LadmConfig {
    Index rank = 1;
    double mu = 1.0;
    /// Initial penalty. Unset means 1.25 / ||P_Omega^*(b)||_2.
    std::optional<double> beta0;
    double beta_max = 1e20;
    double rho = 1.1;
    double eps = 1e-4;
    int max_iters = 1000;
    Loss loss = Loss::L1;
    std::uint64_t seed = 0;
    double t_min = 1e-8;
    double step_safety = 1.0;
    InitMode init = InitMode::GaussianScaled;
    /// Give up when feasibility has not improved for this many iterations.
    int stall_window = 50;

    void validate() const {
        if (rank < 1)
            throw std::invalid_argument("LadmConfig: rank must be >= 1");
        if (!(mu > 0.0))
            throw std::invalid_argument("LadmConfig: mu must be positive");
        if (beta0 && !(*beta0 > 0.0))
            throw std::invalid_argument("LadmConfig: beta0 must be positive");
        if (!(beta_max > 0.0) || (beta0 && *beta0 > beta_max))
            throw std::invalid_argument("LadmConfig: need 0 < beta0 <= beta_max");
        if (!(rho > 1.0))
            throw std::invalid_argument("LadmConfig: rho must exceed 1");
        if (!(eps > 0.0))
            throw std::invalid_argument("LadmConfig: eps must be positive");
        if (max_iters < 1)
            throw std::invalid_argument("LadmConfig: max_iters must be >= 1");
        if (!(t_min > 0.0))
            throw std::invalid_argument("LadmConfig: t_min must be positive");
        if (!(step_safety >= 1.0))
            throw std::invalid_argument("LadmConfig: step_safety must be >= 1");
        if (stall_window < 1)
            throw std::invalid_argument("LadmConfig: stall_window must be >= 1");
    }
};

/// One row per iteration. Optional fields are absent where the quantity does
/// not apply (feasibility, beta and multiplier_inf are LADM-only; step_w is
/// tri-trace only).
struct TraceRow {
    double objective = 0.0;
    std::optional<double> feasibility;
    double step_u = 0.0;
    double step_v = 0.0;
    std::optional<double> step_w;
    std::optional<double> beta;
    std::optional<double> multiplier_inf;
    double iterate_delta = 0.0;

    bool operator==(const TraceRow &) const = default;
};

struct SolverTrace {
    double initial_objective = 0.0;
    std::vector<TraceRow> rows;

    std::size_t size() const { return rows.size(); }
    bool operator==(const SolverTrace &) const = default;
};

/// Solver diverged; the trace up to the failing iteration is attached.
class SolverFailure : public NumericalError {
  public:
    SolverFailure(const std::string &what, SolverTrace trace)
        : NumericalError(what), trace_(std::move(trace)) {}
    const SolverTrace &trace() const { return trace_; }

  private:
    SolverTrace trace_;
};

template <class Factors>
struct RecoveryResult {
    Factors factors;
    Status status = Status::MaxIters;
    int iterations = 0;
    SolverTrace trace;
    double kkt_residual = 0.0;
    /// LADM only: terminal e = A(X) - b - (feasibility gap) and multiplier,
    /// both in canonical Omega order. Empty for PALM.
    Vector sparse;
    Vector multiplier;

    DenseMatrix recovered() const { return factors.product(); }
};

/// Passed to an optional observer after every svt block step.
struct ProxEvent {
    int iteration;
    int block;
    const DenseMatrix &pre;
    double tau;
    const ShrinkResult &post;
};
using ProxObserver = std::function<void(const ProxEvent &)>;

// ---------------------------------------------------------------------------
// Step sizes

inline double lipschitz_step(double curvature, double op_norm_aa, double t_min,
                             double step_safety = 1.0) {
    return std::max(op_norm_aa * curvature, t_min) * step_safety;
}

/// max(||A^*A||_2 * ||F^T F||_2, t_min) * step_safety.
inline double step_size(const DenseMatrix &factor, double op_norm_aa, double t_min,
                        double step_safety = 1.0) {
    const DenseMatrix gram = factor.transpose() * factor;
    return lipschitz_step(spectral_norm(gram), op_norm_aa, t_min, step_safety);
}

// ---------------------------------------------------------------------------
// Initialization

/// Root-mean-square of the observed values.
inline double gaussian_init_rms(const ObservationSet &obs) {
    if (obs.empty())
        return 0.0;
    return obs.values().norm() / std::sqrt(static_cast<double>(obs.size()));
}

inline DenseMatrix gaussian_matrix(Index rows, Index cols, std::mt19937_64 &rng,
                                   double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    DenseMatrix out(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            out(i, j) = scale * normal(rng);
    return out;
}

/// Top-d SVD of the zero-filled observations, padded with zero columns when
/// d exceeds min(m, n).
inline SvdResult top_svd(const ObservationSet &obs, Index d) {
    SvdResult full = thin_svd(zero_filled(obs));
    const Index k = std::min<Index>(d, full.singulars.size());
    SvdResult out{DenseMatrix::Zero(obs.host_rows(), d), Vector::Zero(d),
                  DenseMatrix::Zero(obs.host_cols(), d)};
    out.left.leftCols(k) = full.left.leftCols(k);
    out.singulars.head(k) = full.singulars.head(k);
    out.right.leftCols(k) = full.right.leftCols(k);
    return out;
}

inline FactorPair init_factors(const ObservationSet &obs, Index d, std::uint64_t seed,
                               InitMode mode) {
    if (d < 1)
        throw std::invalid_argument("init_factors: d must be >= 1");
    const Index m = obs.host_rows(), n = obs.host_cols();
    if (mode == InitMode::GaussianScaled) {
        std::mt19937_64 rng(seed);
        const double s = std::sqrt(gaussian_init_rms(obs) / std::sqrt(static_cast<double>(d)));
        DenseMatrix u = gaussian_matrix(m, d, rng, s);
        DenseMatrix v = gaussian_matrix(n, d, rng, s);
        return {std::move(u), std::move(v)};
    }
    SvdResult top = top_svd(obs, d);
    const Vector root = top.singulars.cwiseSqrt();
    return {top.left * root.asDiagonal(), top.right * root.asDiagonal()};
}

/// Three-factor analogue: cube-root split for SpectralWarm. The Gaussian mode
/// draws U and W with scale s = (rms(b) / sqrt(d))^(1/3) and sets V = s * I.
inline FactorTriple init_factor_triple(const ObservationSet &obs, Index d, std::uint64_t seed,
                                       InitMode mode) {
    if (d < 1)
        throw std::invalid_argument("init_factor_triple: d must be >= 1");
    const Index m = obs.host_rows(), n = obs.host_cols();
    if (mode == InitMode::GaussianScaled) {
        std::mt19937_64 rng(seed);
        const double s = std::cbrt(gaussian_init_rms(obs) / std::sqrt(static_cast<double>(d)));
        DenseMatrix u = gaussian_matrix(m, d, rng, s);
        DenseMatrix v = s * DenseMatrix::Identity(d, d);
        DenseMatrix w = gaussian_matrix(n, d, rng, s);
        return {std::move(u), std::move(v), std::move(w)};
    }
    SvdResult top = top_svd(obs, d);
    const Vector root = top.singulars.unaryExpr([](double s) { return std::cbrt(s); });
    DenseMatrix middle = root.asDiagonal();
    return {top.left * root.asDiagonal(), std::move(middle), top.right * root.asDiagonal()};
}

namespace detail {

struct StepRule {
    double coupling;    // 1/mu (PALM) or beta_k (LADM)
    double t_min;
    double step_safety;
};

struct BlockStep {
    double step;
    double trace_norm;
};

inline BlockStep prox_block(DenseMatrix &block, const DenseMatrix &grad, double curvature,
                            double weight, const StepRule &rule, int iteration, int index,
                            const ProxObserver &observer) {
    const double t = lipschitz_step(curvature, 1.0, rule.t_min, rule.step_safety);
    const DenseMatrix pre = block - grad / t;
    const double tau = weight / (rule.coupling * t);
    ShrinkResult post = shrink_singular_values(pre, tau);
    if (observer)
        observer(ProxEvent{iteration, index, pre, tau, post});
    block = std::move(post.value);
    return {t, post.trace_norm()};
}

inline double gram_norm(const DenseMatrix &f) {
    const DenseMatrix gram = f.transpose() * f;
    return spectral_norm(gram);
}

/// U V^T; blocks are updated in the order U, V.
struct PairModel {
    static constexpr int kBlocks = 2;
    static constexpr double kWeight = 0.5;

    FactorPair f;

    Vector sample(const ObservationSet &o) const { return sample_product(f.u, f.v, o); }
    double sum_squares() const { return f.u.squaredNorm() + f.v.squaredNorm(); }
    double trace_norm_sum() const { return trace_norm(f.u) + trace_norm(f.v); }

    template <class Fn>
    void for_each_block(Fn &&fn) const {
        fn(f.u);
        fn(f.v);
    }

    // Step on block k for 0.5*||A(X) - c||^2.
    BlockStep step(int k, const ObservationSet &o, const Vector &c, const StepRule &rule,
                   int it, const ProxObserver &obs) {
        const Vector r = sample(o) - c;
        if (k == 0)
            return prox_block(f.u, scatter_times(o, r, f.v), gram_norm(f.v), kWeight, rule, it,
                              k, obs);
        return prox_block(f.v, scatter_transpose_times(o, r, f.u), gram_norm(f.u), kWeight,
                          rule, it, k, obs);
    }

    /// P_Omega^*(g) applied to each block's partner: the terms compared with
    /// weight * subgradients of ||block||_tr at a critical point.
    std::vector<DenseMatrix> stationarity_terms(const ObservationSet &o, const Vector &g) const {
        return {scatter_times(o, g, f.v), scatter_transpose_times(o, g, f.u)};
    }
};

/// U V W^T; blocks are updated in the order U, V, W.
struct TripleModel {
    static constexpr int kBlocks = 3;
    static constexpr double kWeight = 1.0 / 3.0;

    FactorTriple f;

    Vector sample(const ObservationSet &o) const {
        const DenseMatrix uv = f.u * f.v;
        return sample_product(uv, f.w, o);
    }
    double sum_squares() const {
        return f.u.squaredNorm() + f.v.squaredNorm() + f.w.squaredNorm();
    }
    double trace_norm_sum() const {
        return trace_norm(f.u) + trace_norm(f.v) + trace_norm(f.w);
    }

    template <class Fn>
    void for_each_block(Fn &&fn) const {
        fn(f.u);
        fn(f.v);
        fn(f.w);
    }

    // grad_U = R W V^T, grad_V = U^T R W, grad_W = R^T U V with
    // curvatures ||V W^T||^2, (||U|| ||W||)^2, ||U V||^2.
    BlockStep step(int k, const ObservationSet &o, const Vector &c, const StepRule &rule,
                   int it, const ProxObserver &obs) {
        if (k == 0) {
            const DenseMatrix wv = f.w * f.v.transpose();
            const Vector r = sample_product(f.u, wv, o) - c;
            return prox_block(f.u, scatter_times(o, r, wv), gram_norm(wv), kWeight, rule, it, k,
                              obs);
        }
        if (k == 1) {
            const Vector r = sample(o) - c;
            const DenseMatrix rw = scatter_times(o, r, f.w);
            const double curvature = gram_norm(f.u) * gram_norm(f.w);
            return prox_block(f.v, f.u.transpose() * rw, curvature, kWeight, rule, it, k, obs);
        }
        const DenseMatrix uv = f.u * f.v;
        const Vector r = sample_product(uv, f.w, o) - c;
        return prox_block(f.w, scatter_transpose_times(o, r, uv), gram_norm(uv), kWeight, rule,
                          it, k, obs);
    }

    std::vector<DenseMatrix> stationarity_terms(const ObservationSet &o, const Vector &g) const {
        const DenseMatrix rw = scatter_times(o, g, f.w);
        return {rw * f.v.transpose(), f.u.transpose() * rw,
                scatter_transpose_times(o, g, f.u * f.v)};
    }
};

template <class Model>
double iterate_delta(const Model &before, const Model &after) {
    double diff = 0.0;
    std::vector<const DenseMatrix *> a, b;
    before.for_each_block([&](const DenseMatrix &m) { a.push_back(&m); });
    after.for_each_block([&](const DenseMatrix &m) { b.push_back(&m); });
    for (std::size_t i = 0; i < a.size(); ++i)
        diff += (*b[i] - *a[i]).squaredNorm();
    return std::sqrt(diff) / (1.0 + std::sqrt(before.sum_squares()));
}

/// sum_k max(0, ||term_k||_2 - bound) over the block stationarity terms.
template <class Model>
double norm_bound_excess(const Model &model, const ObservationSet &o, const Vector &g,
                         double bound) {
    double total = 0.0;
    for (const DenseMatrix &t : model.stationarity_terms(o, g))
        total += std::max(0.0, spectral_norm(t) - bound);
    return total;
}

inline void require_observations(const ObservationSet &obs, Index d, const char *who) {
    if (obs.empty())
        throw std::invalid_argument(std::string(who) + ": observation set is empty");
    if (d > std::min(obs.host_rows(), obs.host_cols()))
        throw std::invalid_argument(std::string(who) + ": inner rank " + std::to_string(d) +
                                    " exceeds min host dimension");
}

template <class Model>
TraceRow palm_row(const Model &model, const ObservationSet &obs, double mu) {
    TraceRow row;
    const Vector r = model.sample(obs) - obs.values();
    row.objective = Model::kWeight * model.trace_norm_sum() + r.squaredNorm() / (2.0 * mu);
    return row;
}

template <class Model>
RecoveryResult<decltype(Model::f)> run_palm(Model model, const ObservationSet &obs,
                                            const PalmConfig &cfg, const ProxObserver &observer,
                                            const char *who) {
    using Factors = decltype(Model::f);
    RecoveryResult<Factors> out;
    out.trace.initial_objective = palm_row(model, obs, cfg.mu).objective;
    const StepRule rule{1.0 / cfg.mu, cfg.t_min, cfg.step_safety};
    const Vector &b = obs.values();

    for (int it = 1; it <= cfg.max_iters; ++it) {
        const Model before = model;
        double steps[3] = {0.0, 0.0, 0.0};
        double trace_sum = 0.0;
        for (int k = 0; k < Model::kBlocks; ++k) {
            const BlockStep s = model.step(k, obs, b, rule, it, observer);
            steps[k] = s.step;
            trace_sum += s.trace_norm;
        }
        TraceRow row;
        const Vector r = model.sample(obs) - b;
        row.objective = Model::kWeight * trace_sum + r.squaredNorm() / (2.0 * cfg.mu);
        row.step_u = steps[0];
        row.step_v = steps[1];
        if (Model::kBlocks == 3)
            row.step_w = steps[2];
        row.iterate_delta = iterate_delta(before, model);
        if (!std::isfinite(row.objective) || !std::isfinite(row.iterate_delta))
            throw SolverFailure(std::string(who) + ": non-finite objective at iteration " +
                                    std::to_string(it),
                                out.trace);
        out.trace.rows.push_back(row);
        out.iterations = it;
        if (row.iterate_delta < cfg.rel_tol) {
            out.status = Status::Converged;
            break;
        }
    }
    const Vector residual = obs.values() - model.sample(obs);
    out.kkt_residual = norm_bound_excess(model, obs, residual, Model::kWeight * cfg.mu);
    out.factors = std::move(model.f);
    return out;
}

inline double loss_value(const Vector &e, Loss loss) {
    if (loss == Loss::L1)
        return e.lpNorm<1>();
    return e.cwiseAbs().cwiseSqrt().sum();
}

template <class Model>
RecoveryResult<decltype(Model::f)> run_ladm(Model model, const ObservationSet &obs,
                                            const LadmConfig &cfg, const ProxObserver &observer,
                                            const char *who) {
    using Factors = decltype(Model::f);
    RecoveryResult<Factors> out;
    const Vector &b = obs.values();
    const Index l = obs.size();
    Vector e = Vector::Zero(l);
    Vector lambda = Vector::Zero(l);
    double beta = cfg.beta0 ? *cfg.beta0 : 0.0;
    if (!cfg.beta0) {
        const double scale = spectral_norm(zero_filled(obs));
        beta = scale > 0.0 ? std::min(1.25 / scale, cfg.beta_max) : 1.0;
    }
    out.trace.initial_objective =
        Model::kWeight * model.trace_norm_sum() + loss_value(e, cfg.loss) / cfg.mu;

    double best_feasibility = std::numeric_limits<double>::infinity();
    int last_improvement = 0;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const Model before = model;
        const StepRule rule{beta, cfg.t_min, cfg.step_safety};
        // Linearized factor steps target c = b + e_k - lambda_k / beta_k.
        const Vector target = b + e - lambda / beta;
        double steps[3] = {0.0, 0.0, 0.0};
        double trace_sum = 0.0;
        for (int k = 0; k < Model::kBlocks; ++k) {
            const BlockStep s = model.step(k, obs, target, rule, it, observer);
            steps[k] = s.step;
            trace_sum += s.trace_norm;
        }
        const Vector z = model.sample(obs) - b;
        const Vector shifted = z + lambda / beta;
        if (cfg.loss == Loss::L1)
            e = soft_threshold(shifted, 1.0 / (cfg.mu * beta));
        else
            e = half_threshold(shifted, 2.0 / (cfg.mu * beta));
        const Vector gap = z - e;
        lambda += beta * gap;

        TraceRow row;
        row.objective = Model::kWeight * trace_sum + loss_value(e, cfg.loss) / cfg.mu;
        row.feasibility = gap.norm();
        row.step_u = steps[0];
        row.step_v = steps[1];
        if (Model::kBlocks == 3)
            row.step_w = steps[2];
        row.beta = beta;
        row.multiplier_inf = lambda.size() ? lambda.lpNorm<Eigen::Infinity>() : 0.0;
        row.iterate_delta = iterate_delta(before, model);
        if (!std::isfinite(row.objective) || !std::isfinite(*row.feasibility) ||
            !std::isfinite(row.iterate_delta))
            throw SolverFailure(std::string(who) + ": non-finite iterate at iteration " +
                                    std::to_string(it),
                                out.trace);
        out.trace.rows.push_back(row);
        out.iterations = it;

        beta = std::min(cfg.rho * beta, cfg.beta_max);
        if (*row.feasibility < cfg.eps) {
            out.status = Status::Converged;
            break;
        }
        if (*row.feasibility < best_feasibility) {
            best_feasibility = *row.feasibility;
            last_improvement = it;
        } else if (it - last_improvement >= cfg.stall_window) {
            break;
        }
    }
    // 0 in weight * d||B||_tr + A^*(lambda) * partner, plus primal feasibility.
    double kkt = norm_bound_excess(model, obs, lambda, Model::kWeight);
    if (!out.trace.rows.empty())
        kkt += *out.trace.rows.back().feasibility;
    out.kkt_residual = kkt;
    out.sparse = std::move(e);
    out.multiplier = std::move(lambda);
    out.factors = std::move(model.f);
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Matrix completion (PALM)

/// min (||U||_tr + ||V||_tr)/2 + ||P_Omega(U V^T) - b||^2 / (2 mu).
inline RecoveryResult<FactorPair> palm_bitr_mc(const ObservationSet &obs, const PalmConfig &cfg,
                                               const ProxObserver &observer = {}) {
    cfg.validate();
    detail::require_observations(obs, cfg.rank, "palm_bitr_mc");
    detail::PairModel model{init_factors(obs, cfg.rank, cfg.seed, cfg.init)};
    return detail::run_palm(std::move(model), obs, cfg, observer, "palm_bitr_mc");
}

/// min (||U||_tr + ||V||_tr + ||W||_tr)/3 + ||P_Omega(U V W^T) - b||^2 / (2 mu).
inline RecoveryResult<FactorTriple> palm_tritr_mc(const ObservationSet &obs,
                                                  const PalmConfig &cfg,
                                                  const ProxObserver &observer = {}) {
    cfg.validate();
    detail::require_observations(obs, cfg.rank, "palm_tritr_mc");
    detail::TripleModel model{init_factor_triple(obs, cfg.rank, cfg.seed, cfg.init)};
    return detail::run_palm(std::move(model), obs, cfg, observer, "palm_tritr_mc");
}

// ---------------------------------------------------------------------------
// Robust recovery (LADM)

/// min (||U||_tr + ||V||_tr)/2 + f(e)/mu  s.t.  e = P_Omega(U V^T) - b,
/// f = ||.||_1 or ||.||_{1/2}^{1/2}.
inline RecoveryResult<FactorPair> ladm_bitr(const ObservationSet &obs, const LadmConfig &cfg,
                                            const ProxObserver &observer = {}) {
    cfg.validate();
    detail::require_observations(obs, cfg.rank, "ladm_bitr");
    detail::PairModel model{init_factors(obs, cfg.rank, cfg.seed, cfg.init)};
    return detail::run_ladm(std::move(model), obs, cfg, observer, "ladm_bitr");
}

inline RecoveryResult<FactorTriple> ladm_tritr(const ObservationSet &obs, const LadmConfig &cfg,
                                               const ProxObserver &observer = {}) {
    cfg.validate();
    detail::require_observations(obs, cfg.rank, "ladm_tritr");
    detail::TripleModel model{init_factor_triple(obs, cfg.rank, cfg.seed, cfg.init)};
    return detail::run_ladm(std::move(model), obs, cfg, observer, "ladm_tritr");
}

// ---------------------------------------------------------------------------
// Baseline and diagnostics

/// Proximal gradient on mu*||X||_tr + 0.5*||P_Omega(X) - b||^2 with unit step
/// (P_Omega is an orthogonal projection), starting from zero.
inline DenseMatrix trace_baseline_mc(const ObservationSet &obs, double mu, int iters) {
    if (obs.empty())
        throw std::invalid_argument("trace_baseline_mc: observation set is empty");
    if (!(mu >= 0.0))
        throw std::invalid_argument("trace_baseline_mc: mu must be non-negative");
    DenseMatrix x = DenseMatrix::Zero(obs.host_rows(), obs.host_cols());
    for (int it = 0; it < iters; ++it) {
        DenseMatrix g = x;
        for (Index k = 0; k < obs.size(); ++k)
            g(obs.row(k), obs.col(k)) = obs.values()(k);
        x = svt(g, mu);
        if (!all_finite(x))
            throw NumericalError("trace_baseline_mc: non-finite iterate at iteration " +
                                 std::to_string(it + 1));
    }
    return x;
}

/// Excess of the block stationarity terms over their first-order norm bound,
/// e.g. max(0, ||P_Omega(D - U V^T) V||_2 - mu/2) + (same for V). Zero at a
/// critical point.
inline double kkt_residual_mc(const FactorPair &f, const ObservationSet &obs, double mu) {
    const detail::PairModel model{f};
    const Vector residual = obs.values() - model.sample(obs);
    return detail::norm_bound_excess(model, obs, residual, detail::PairModel::kWeight * mu);
}

inline double kkt_residual_mc(const FactorTriple &f, const ObservationSet &obs, double mu) {
    const detail::TripleModel model{f};
    const Vector residual = obs.values() - model.sample(obs);
    return detail::norm_bound_excess(model, obs, residual, detail::TripleModel::kWeight * mu);
}

template <class Factors>
double kkt_residual_mc(const RecoveryResult<Factors> &result, const ObservationSet &obs,
                       double mu) {
    return kkt_residual_mc(result.factors, obs, mu);
}

} // namespace schatten
