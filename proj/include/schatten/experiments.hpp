#pragma once

// Experiment pipelines shared by the command-line tool and the test suites:
// synthetic completion trials, low-rank + sparse separation, ratings
// completion over a rank grid, and the norm certification battery.

#include "schatten/core.hpp"
#include "schatten/data.hpp"
#include "schatten/metrics.hpp"
#include "schatten/norms.hpp"
#include "schatten/solvers.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace schatten {

enum class Penalty { BiTrace, TriTrace };

inline std::string_view to_string(Penalty p) { return p == Penalty::BiTrace ? "bitr" : "tritr"; }

/// floor(1.25 r), at least 1.
inline Index default_inner_rank(Index true_rank) {
    return std::max<Index>(1, static_cast<Index>(std::floor(1.25 * static_cast<double>(true_rank))));
}

/// Solver summary common to both factor shapes.
struct RunSummary {
    Status status = Status::MaxIters;
    int iterations = 0;
    double kkt_residual = 0.0;
    SolverTrace trace;
    std::optional<std::string> error;

    bool failed() const { return error.has_value(); }
};

template <class Factors>
RunSummary summarize(const RecoveryResult<Factors> &r) {
    return {r.status, r.iterations, r.kkt_residual, r.trace, std::nullopt};
}

inline RunSummary failed_run(const std::string &what, SolverTrace trace = {}) {
    RunSummary s;
    s.trace = std::move(trace);
    s.iterations = static_cast<int>(s.trace.size());
    s.error = what;
    return s;
}

// ---------------------------------------------------------------------------
// Synthetic matrix completion

struct SynthMcConfig {
    Index m = 100;
    Index n = 100;
    Index rank = 5;
    double sr = 0.3;
    double nf = 0.0;
    std::optional<Index> d;
    Penalty penalty = Penalty::BiTrace;
    double mu = 2.0;
    int max_iters = 500;
    double rel_tol = 1e-4;
    bool run_baseline = true;
    /// Unset: sigma * sqrt(sr) * (sqrt(m) + sqrt(n)) with sigma = max(nf, 1e-2 * rms(b)).
    std::optional<double> baseline_mu;
    int baseline_iters = 500;

    Index inner_rank() const { return d ? *d : default_inner_rank(rank); }

    void validate() const {
        if (m < 1 || n < 1)
            throw std::invalid_argument("synth-mc: m and n must be >= 1");
        if (rank < 0 || rank > std::min(m, n))
            throw std::invalid_argument("synth-mc: rank must lie in [0, min(m, n)]");
        if (!(sr > 0.0 && sr <= 1.0))
            throw std::invalid_argument("synth-mc: sr must lie in (0, 1]");
        if (!(nf >= 0.0))
            throw std::invalid_argument("synth-mc: nf must be >= 0");
        if (inner_rank() < 1 || inner_rank() > std::min(m, n))
            throw std::invalid_argument("synth-mc: d must lie in [1, min(m, n)]");
        if (baseline_mu && !(*baseline_mu >= 0.0))
            throw std::invalid_argument("synth-mc: baseline mu must be >= 0");
        if (baseline_iters < 1)
            throw std::invalid_argument("synth-mc: baseline iterations must be >= 1");
        PalmConfig{inner_rank(), mu, max_iters, rel_tol}.validate();
    }

    double resolved_baseline_mu(const ObservationSet &obs) const {
        if (baseline_mu)
            return *baseline_mu;
        const double sigma = std::max(nf, 1e-2 * gaussian_init_rms(obs));
        return sigma * std::sqrt(sr) *
               (std::sqrt(static_cast<double>(m)) + std::sqrt(static_cast<double>(n)));
    }
};

struct SynthMcTrial {
    std::uint64_t seed = 0;
    Index observed = 0;
    RunSummary run;
    EvalReport metrics;
    std::optional<double> baseline_mu;
    std::optional<double> baseline_rse;
};

inline SynthMcTrial run_synth_mc_trial(const SynthMcConfig &cfg, std::uint64_t seed) {
    cfg.validate();
    const SyntheticInstance inst = make_synthetic_mc(cfg.m, cfg.n, cfg.rank, cfg.sr, cfg.nf, seed);
    const ObservationSet &obs = inst.observations;
    const bool has_truth = inst.ground_truth.norm() > 0.0;

    SynthMcTrial out;
    out.seed = seed;
    out.observed = obs.size();
    PalmConfig pc;
    pc.rank = cfg.inner_rank();
    pc.mu = cfg.mu;
    pc.max_iters = cfg.max_iters;
    pc.rel_tol = cfg.rel_tol;
    pc.seed = seed;
    try {
        if (cfg.penalty == Penalty::BiTrace) {
            const auto res = palm_bitr_mc(obs, pc);
            out.run = summarize(res);
            if (has_truth)
                out.metrics.rse = rse(res.recovered(), inst.ground_truth);
            try {
                out.metrics.c1 = c1_constant(SamplingOperator(obs), obs.values(), res.factors);
                out.metrics.c3 = c3_constant(obs, res.factors);
                out.metrics.c3_lower_bound = c3_lower_bound(obs, cfg.mu);
            } catch (const std::domain_error &) {
                // perfect fit: both constants undefined
            }
        } else {
            const auto res = palm_tritr_mc(obs, pc);
            out.run = summarize(res);
            if (has_truth)
                out.metrics.rse = rse(res.recovered(), inst.ground_truth);
        }
    } catch (const SolverFailure &e) {
        out.run = failed_run(e.what(), e.trace());
    } catch (const NumericalError &e) {
        out.run = failed_run(e.what());
    }
    if (cfg.run_baseline) {
        out.baseline_mu = cfg.resolved_baseline_mu(obs);
        try {
            const DenseMatrix x = trace_baseline_mc(obs, *out.baseline_mu, cfg.baseline_iters);
            if (has_truth)
                out.baseline_rse = rse(x, inst.ground_truth);
        } catch (const NumericalError &) {
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Low-rank + sparse separation

struct RpcaConfig {
    Index m = 60;
    Index n = 60;
    Index rank = 3;
    double spike_fraction = 0.05;
    double spike_magnitude = 5.0;
    double missing = 0.0;
    std::optional<std::string> input; // dense matrix file instead of a synthetic instance
    std::optional<Index> d;
    Penalty penalty = Penalty::BiTrace;
    Loss loss = Loss::L1;
    std::optional<double> mu; // unset: sqrt(max(m, n))
    std::optional<double> beta0;
    double rho = 1.1;
    double eps = 1e-4;
    int max_iters = 1000;
    /// Entries of |e| above this count as detected spikes.
    double support_cutoff = 1e-3;

    void validate() const {
        if (!input) {
            if (m < 1 || n < 1)
                throw std::invalid_argument("rpca: m and n must be >= 1");
            if (rank < 0 || rank > std::min(m, n))
                throw std::invalid_argument("rpca: rank must lie in [0, min(m, n)]");
            if (!(spike_fraction >= 0.0 && spike_fraction <= 1.0))
                throw std::invalid_argument("rpca: spike fraction must lie in [0, 1]");
            if (!(spike_magnitude >= 0.0))
                throw std::invalid_argument("rpca: spike magnitude must be >= 0");
        } else if (!d) {
            throw std::invalid_argument("rpca: --d is required with an input matrix");
        }
        if (!(missing >= 0.0 && missing < 1.0))
            throw std::invalid_argument("rpca: missing fraction must lie in [0, 1)");
        if (d && *d < 1)
            throw std::invalid_argument("rpca: d must be >= 1");
        if (mu && !(*mu > 0.0))
            throw std::invalid_argument("rpca: mu must be positive");
        LadmConfig lc;
        lc.beta0 = beta0;
        lc.rho = rho;
        lc.eps = eps;
        lc.max_iters = max_iters;
        lc.validate();
    }
};

struct RpcaOutcome {
    std::uint64_t seed = 0;
    Index rows = 0;
    Index cols = 0;
    Index observed = 0;
    Index inner_rank = 0;
    double mu = 0.0;
    RunSummary run;
    DenseMatrix low_rank;
    DenseMatrix sparse; // observed minus low-rank on Omega, zero elsewhere
    EvalReport metrics;
    std::optional<double> support_f1;
};

/// Observed cells after dropping a `missing` fraction uniformly at random.
inline ObservationSet observe_with_missing(const DenseMatrix &d, double missing,
                                           std::uint64_t seed) {
    const Index m = d.rows(), n = d.cols();
    std::mt19937_64 rng(seed ^ 0x2545f4914f6cdd1dULL);
    const Index count = observation_count(m, n, 1.0 - missing);
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(count));
    for (auto [i, j] : sample_cells(m, n, count, rng))
        entries.push_back({i, j, d(i, j)});
    return ObservationSet(m, n, std::move(entries));
}

inline RpcaOutcome run_rpca(const RpcaConfig &cfg, std::uint64_t seed) {
    cfg.validate();
    std::optional<SparseCorruption> truth;
    DenseMatrix data;
    if (cfg.input) {
        data = load_matrix_file(*cfg.input);
    } else {
        truth = gen_sparse_corruption(cfg.m, cfg.n, cfg.rank, cfg.spike_fraction,
                                      cfg.spike_magnitude, seed);
        data = truth->observed();
    }
    RpcaOutcome out;
    out.seed = seed;
    out.rows = data.rows();
    out.cols = data.cols();
    out.inner_rank = cfg.d ? *cfg.d : default_inner_rank(cfg.rank);
    out.mu = cfg.mu ? *cfg.mu : std::sqrt(static_cast<double>(std::max(out.rows, out.cols)));
    if (out.inner_rank > std::min(out.rows, out.cols))
        throw std::invalid_argument("rpca: d exceeds min(m, n) = " +
                                    std::to_string(std::min(out.rows, out.cols)));

    const ObservationSet obs = observe_with_missing(data, cfg.missing, seed);
    out.observed = obs.size();

    LadmConfig lc;
    lc.rank = out.inner_rank;
    lc.mu = out.mu;
    lc.beta0 = cfg.beta0;
    lc.rho = cfg.rho;
    lc.eps = cfg.eps;
    lc.max_iters = cfg.max_iters;
    lc.loss = cfg.loss;
    lc.seed = seed;

    Vector e;
    try {
        if (cfg.penalty == Penalty::BiTrace) {
            const auto res = ladm_bitr(obs, lc);
            out.run = summarize(res);
            out.low_rank = res.recovered();
            e = res.sparse;
        } else {
            const auto res = ladm_tritr(obs, lc);
            out.run = summarize(res);
            out.low_rank = res.recovered();
            e = res.sparse;
        }
    } catch (const SolverFailure &ex) {
        out.run = failed_run(ex.what(), ex.trace());
        return out;
    }
    // e = A(X) - b, so the spike estimate on Omega is -e.
    out.sparse = scatter_omega(obs, -e);

    if (truth) {
        if (truth->low_rank.norm() > 0.0)
            out.metrics.rse = rse(out.low_rank, truth->low_rank);
        Vector scores(obs.size());
        std::vector<bool> labels(static_cast<std::size_t>(obs.size()));
        std::vector<bool> detected(labels.size());
        for (Index k = 0; k < obs.size(); ++k) {
            const auto idx = static_cast<std::size_t>(k);
            scores(k) = std::abs(e(k));
            labels[idx] = truth->spike_mask[static_cast<std::size_t>(obs.row(k) * out.cols +
                                                                     obs.col(k))];
            detected[idx] = scores(k) > cfg.support_cutoff;
        }
        const bool both = std::find(labels.begin(), labels.end(), true) != labels.end() &&
                          std::find(labels.begin(), labels.end(), false) != labels.end();
        if (both)
            out.metrics.auc = auc(scores, labels);
        out.support_f1 = support_f1(detected, labels);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ratings completion

struct CfConfig {
    std::string path;
    RatingsFormat format = RatingsFormat::DoubleColon;
    double train_fraction = 0.9;
    std::vector<Index> d_grid{5, 10, 15, 20};
    Penalty penalty = Penalty::BiTrace;
    double mu = 100.0;
    int max_iters = 500;
    double rel_tol = 1e-4;

    void validate() const {
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw std::invalid_argument("cf: train fraction must lie in (0, 1)");
        if (d_grid.empty())
            throw std::invalid_argument("cf: d grid is empty");
        for (Index d : d_grid)
            if (d < 1)
                throw std::invalid_argument("cf: every d must be >= 1");
        PalmConfig{1, mu, max_iters, rel_tol}.validate();
    }
};

struct CfPoint {
    Index d = 0;
    RunSummary run;
    std::optional<double> rmse;
};

struct CfOutcome {
    std::uint64_t seed = 0;
    Index users = 0;
    Index items = 0;
    Index train_size = 0;
    Index test_size = 0;
    double train_mean = 0.0;
    double mean_predictor_rmse = 0.0;
    std::vector<CfPoint> points;
};

inline CfOutcome run_cf(const CfConfig &cfg, std::uint64_t seed) {
    cfg.validate();
    const RatingsDataset ds = split_ratings(load_ratings(cfg.path, cfg.format), cfg.train_fraction, seed);
    CfOutcome out;
    out.seed = seed;
    out.users = ds.num_users;
    out.items = ds.num_items;
    out.train_size = ds.train.size();
    out.test_size = ds.test.size();
    out.train_mean = ds.train_mean();
    out.mean_predictor_rmse =
        rmse(Vector::Constant(ds.test.size(), out.train_mean), ds.test.values());

    const ObservationSet train = centered_train(ds);
    const Index limit = std::min(ds.num_users, ds.num_items);
    for (Index d : cfg.d_grid) {
        if (d > limit)
            throw std::invalid_argument("cf: d = " + std::to_string(d) +
                                        " exceeds min(users, items) = " + std::to_string(limit));
        CfPoint pt;
        pt.d = d;
        PalmConfig pc;
        pc.rank = d;
        pc.mu = cfg.mu;
        pc.max_iters = cfg.max_iters;
        pc.rel_tol = cfg.rel_tol;
        pc.seed = seed;
        try {
            DenseMatrix completed;
            if (cfg.penalty == Penalty::BiTrace) {
                const auto res = palm_bitr_mc(train, pc);
                pt.run = summarize(res);
                completed = res.recovered();
            } else {
                const auto res = palm_tritr_mc(train, pc);
                pt.run = summarize(res);
                completed = res.recovered();
            }
            pt.rmse = rmse(predict_test(ds, completed), ds.test.values());
        } catch (const SolverFailure &e) {
            pt.run = failed_run(e.what(), e.trace());
        }
        out.points.push_back(std::move(pt));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Certification battery

struct CertificationConfig {
    int trials = 200;
    Index max_dim = 20;
    int factorizations = 100;
    std::uint64_t seed = 0;
    double tolerance = 1e-8;
    /// Test hook: relative perturbation applied to every bi_trace value.
    double bi_trace_fault = 0.0;

    void validate() const {
        if (trials < 1)
            throw std::invalid_argument("verify: trials must be >= 1");
        if (max_dim < 1)
            throw std::invalid_argument("verify: max dim must be >= 1");
        if (factorizations < 1)
            throw std::invalid_argument("verify: factorizations must be >= 1");
        if (!(tolerance > 0.0))
            throw std::invalid_argument("verify: tolerance must be positive");
    }
};

struct CheckResult {
    std::string name;
    long long cases = 0;
    double max_deviation = 0.0; // positive part of the worst violation, relative
    double tolerance = 0.0;

    bool passed() const { return max_deviation <= tolerance; }
};

inline DenseMatrix random_orthogonal(Index n, std::mt19937_64 &rng) {
    const DenseMatrix g = gaussian_matrix(n, n, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    DenseMatrix q = qr.householderQ();
    return q;
}

/// Rank-r matrix with singular values spread over a few decades.
inline DenseMatrix random_certification_matrix(Index m, Index n, Index r, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> decade(-2.0, 2.0);
    Vector s(r);
    for (Index i = 0; i < r; ++i)
        s(i) = std::pow(10.0, decade(rng));
    const DenseMatrix p = gaussian_matrix(m, r, rng);
    const DenseMatrix q = gaussian_matrix(n, r, rng);
    return p * s.asDiagonal() * q.transpose();
}

/// X = U V^T with inner width d >= rank(X): balanced split padded with a
/// random null block, mixed by a random invertible d x d matrix.
inline FactorPair random_pair_factorization(const DenseMatrix &x, Index d, std::mt19937_64 &rng) {
    const SvdResult svd = thin_svd(x);
    const Index r = numerical_rank(svd.singulars);
    if (d < std::max<Index>(r, 1))
        throw std::invalid_argument("random_pair_factorization: d below rank");
    const Vector root = svd.singulars.head(r).cwiseSqrt();
    DenseMatrix u = DenseMatrix::Zero(x.rows(), d);
    DenseMatrix v = DenseMatrix::Zero(x.cols(), d);
    u.leftCols(r) = svd.left.leftCols(r) * root.asDiagonal();
    v.leftCols(r) = svd.right.leftCols(r) * root.asDiagonal();
    u.rightCols(d - r) = gaussian_matrix(x.rows(), d - r, rng);
    const DenseMatrix g = DenseMatrix::Identity(d, d) + 0.5 * gaussian_matrix(d, d, rng);
    const DenseMatrix g_inv_t = g.inverse().transpose();
    return {u * g, v * g_inv_t};
}

/// X = U V W^T from a random pair split U0 V0^T and a random invertible middle.
inline FactorTriple random_triple_factorization(const DenseMatrix &x, Index d,
                                                std::mt19937_64 &rng) {
    const FactorPair fp = random_pair_factorization(x, d, rng);
    const DenseMatrix h = DenseMatrix::Identity(d, d) + 0.5 * gaussian_matrix(d, d, rng);
    const DenseMatrix k = DenseMatrix::Identity(d, d) + 0.5 * gaussian_matrix(d, d, rng);
    // U0 V0^T = (U0 H^-1) (H K) (K^-1 V0^T)
    return {fp.u * h.inverse(), h * k, fp.v * k.inverse().transpose()};
}

inline std::vector<CheckResult> run_certification(const CertificationConfig &cfg) {
    cfg.validate();
    const double tol = cfg.tolerance;
    CheckResult thm1{"bi_trace_identity", 0, 0.0, tol};
    CheckResult thm2{"tri_trace_identity", 0, 0.0, tol};
    CheckResult min_bi{"minimality_bi_trace", 0, 0.0, tol};
    CheckResult min_tri{"minimality_tri_trace", 0, 0.0, tol};
    CheckResult unitary{"unitary_invariance", 0, 0.0, tol};
    CheckResult chain{"norm_chain", 0, 0.0, tol};
    CheckResult homog{"homogeneity", 0, 0.0, tol};

    auto worst = [](CheckResult &c, double dev) {
        ++c.cases;
        c.max_deviation = std::max(c.max_deviation, dev);
    };
    const auto bi = [&](const DenseMatrix &x) { return bi_trace(x) * (1.0 + cfg.bi_trace_fault); };

    for (int t = 0; t < cfg.trials; ++t) {
        std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(t));
        std::uniform_int_distribution<Index> dim(1, cfg.max_dim);
        const Index m = dim(rng), n = dim(rng);
        std::uniform_int_distribution<Index> rank_pick(1, std::min(m, n));
        const Index r = rank_pick(rng);
        const DenseMatrix x = random_certification_matrix(m, n, r, rng);

        const double s_half = schatten_quasi_norm(x, 0.5);
        const double s_third = schatten_quasi_norm(x, 1.0 / 3.0);
        const double bi_x = bi(x);
        const double tri_x = tri_trace(x);
        worst(thm1, std::abs(bi_x - s_half) / (1.0 + s_half));
        worst(thm2, std::abs(tri_x - s_third) / (1.0 + s_third));

        std::uniform_int_distribution<Index> extra(0, 3);
        for (int f = 0; f < cfg.factorizations; ++f) {
            const Index d = r + extra(rng);
            const FactorPair fp = random_pair_factorization(x, d, rng);
            worst(min_bi, std::max(0.0, s_half - trace_norm(fp.u) * trace_norm(fp.v)) /
                              (1.0 + s_half));
            const FactorTriple ft = random_triple_factorization(x, d, rng);
            const double prod = trace_norm(ft.u) * trace_norm(ft.v) * trace_norm(ft.w);
            worst(min_tri, std::max(0.0, s_third - prod) / (1.0 + s_third));
        }

        const DenseMatrix p = random_orthogonal(m, rng);
        const DenseMatrix q = random_orthogonal(n, rng);
        const DenseMatrix rotated = p * x * q.transpose();
        worst(unitary, std::max(std::abs(bi(rotated) - bi_x) / (1.0 + bi_x),
                                std::abs(tri_trace(rotated) - tri_x) / (1.0 + tri_x)));

        const NormChain nc = norm_chain(x);
        double chain_dev = 0.0;
        for (double s : nc.slacks())
            chain_dev = std::max(chain_dev, -s / (1.0 + nc.rank_sq_trace));
        worst(chain, chain_dev);

        std::uniform_real_distribution<double> scalar(-10.0, 10.0);
        const double a = scalar(rng);
        worst(homog, std::abs(bi(a * x) - std::abs(a) * bi_x) / (1.0 + std::abs(a) * bi_x));
    }
    return {thm1, thm2, min_bi, min_tri, unitary, chain, homog};
}

} // namespace schatten
