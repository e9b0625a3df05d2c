#include "schatten/experiments.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace schatten;

TEST(InnerRank, DefaultRule) {
    EXPECT_EQ(default_inner_rank(0), 1);
    EXPECT_EQ(default_inner_rank(1), 1);
    EXPECT_EQ(default_inner_rank(3), 3);
    EXPECT_EQ(default_inner_rank(4), 5);
    EXPECT_EQ(default_inner_rank(5), 6);
    EXPECT_EQ(default_inner_rank(8), 10);
}

// ---------------------------------------------------------------------------
// Certification

TEST(Certification, DefaultsPass) {
    const auto checks = run_certification(CertificationConfig{});
    ASSERT_EQ(checks.size(), 7u);
    for (const CheckResult &c : checks) {
        EXPECT_TRUE(c.passed()) << c.name << " deviation " << c.max_deviation;
        EXPECT_GT(c.cases, 0);
    }
}

TEST(Certification, InjectedFaultIsDetected) {
    CertificationConfig cfg;
    cfg.trials = 5;
    cfg.max_dim = 8;
    cfg.factorizations = 10;
    cfg.bi_trace_fault = 1e-3;
    const auto checks = run_certification(cfg);
    bool identity_failed = false;
    for (const CheckResult &c : checks)
        if (c.name == "bi_trace_identity")
            identity_failed = !c.passed();
    EXPECT_TRUE(identity_failed);
}

TEST(Certification, SeedDeterminism) {
    CertificationConfig cfg;
    cfg.trials = 10;
    cfg.max_dim = 10;
    cfg.factorizations = 5;
    const auto a = run_certification(cfg);
    const auto b = run_certification(cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].cases, b[i].cases);
        EXPECT_EQ(a[i].max_deviation, b[i].max_deviation);
    }
}

TEST(Certification, ConfigErrors) {
    CertificationConfig cfg;
    cfg.trials = 0;
    EXPECT_THROW(run_certification(cfg), std::invalid_argument);
    cfg = {};
    cfg.tolerance = 0.0;
    EXPECT_THROW(run_certification(cfg), std::invalid_argument);
}

TEST(Certification, RandomFactorizationsReproduceMatrix) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto ks = oracle::random_known(9, 7, 3, rng, 0.1, 10.0);
        const FactorPair fp = random_pair_factorization(ks.x, 5, rng);
        EXPECT_EQ(fp.rank(), 5);
        EXPECT_LT((fp.product() - ks.x).norm(), 1e-8 * ks.x.norm());
        EXPECT_GE(trace_norm(fp.u) * trace_norm(fp.v),
                  oracle::schatten(ks.s, 0.5) * (1 - 1e-10));
        const FactorTriple ft = random_triple_factorization(ks.x, 4, rng);
        EXPECT_LT((ft.product() - ks.x).norm(), 1e-8 * ks.x.norm());
        EXPECT_GE(trace_norm(ft.u) * trace_norm(ft.v) * trace_norm(ft.w),
                  oracle::schatten(ks.s, 1.0 / 3.0) * (1 - 1e-10));
    }
    const auto ks = oracle::random_known(6, 6, 3, rng);
    EXPECT_THROW(random_pair_factorization(ks.x, 2, rng), std::invalid_argument);
}

TEST(Certification, RandomOrthogonalIsOrthogonal) {
    std::mt19937_64 rng(9);
    const DenseMatrix q = random_orthogonal(8, rng);
    EXPECT_LT((q.transpose() * q - DenseMatrix::Identity(8, 8)).norm(), 1e-12);
}

// ---------------------------------------------------------------------------
// Synthetic completion pipeline

TEST(SynthMc, TrialProducesMetrics) {
    SynthMcConfig cfg;
    cfg.m = 40;
    cfg.n = 35;
    cfg.rank = 3;
    cfg.sr = 0.5;
    cfg.mu = 0.5;
    cfg.max_iters = 300;
    for (Penalty p : {Penalty::BiTrace, Penalty::TriTrace}) {
        cfg.penalty = p;
        const SynthMcTrial t = run_synth_mc_trial(cfg, 3);
        EXPECT_FALSE(t.run.failed());
        EXPECT_EQ(t.observed, 700);
        ASSERT_TRUE(t.metrics.rse.has_value());
        EXPECT_LT(*t.metrics.rse, 0.05);
        EXPECT_TRUE(t.baseline_rse.has_value());
        EXPECT_EQ(t.metrics.c3.has_value(), p == Penalty::BiTrace);
        if (p == Penalty::BiTrace) {
            EXPECT_NEAR(*t.metrics.c1, *t.metrics.c3, 1e-12 * *t.metrics.c3);
            EXPECT_GE(*t.metrics.c3, *t.metrics.c3_lower_bound);
        }
        const SynthMcTrial again = run_synth_mc_trial(cfg, 3);
        EXPECT_EQ(again.run.trace, t.run.trace);
        EXPECT_EQ(again.metrics.rse, t.metrics.rse);
    }
}

TEST(SynthMc, ZeroRankHasNoRse) {
    SynthMcConfig cfg;
    cfg.m = 10;
    cfg.n = 10;
    cfg.rank = 0;
    cfg.d = 2;
    cfg.run_baseline = false;
    const SynthMcTrial t = run_synth_mc_trial(cfg, 1);
    EXPECT_FALSE(t.metrics.rse.has_value());
    EXPECT_FALSE(t.baseline_rse.has_value());
}

TEST(SynthMc, ConfigErrors) {
    SynthMcConfig cfg;
    cfg.sr = 1.5;
    EXPECT_THROW(run_synth_mc_trial(cfg, 0), std::invalid_argument);
    cfg = {};
    cfg.d = 101;
    EXPECT_THROW(run_synth_mc_trial(cfg, 0), std::invalid_argument);
    cfg = {};
    cfg.rank = 200;
    EXPECT_THROW(run_synth_mc_trial(cfg, 0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Robust recovery pipeline

TEST(Rpca, SyntheticOutcome) {
    RpcaConfig cfg;
    for (Loss loss : {Loss::L1, Loss::LHalf}) {
        cfg.loss = loss;
        const RpcaOutcome o = run_rpca(cfg, 2);
        EXPECT_FALSE(o.run.failed());
        EXPECT_EQ(o.inner_rank, 3);
        EXPECT_DOUBLE_EQ(o.mu, std::sqrt(60.0));
        ASSERT_TRUE(o.metrics.auc && o.metrics.rse && o.support_f1);
        EXPECT_GT(*o.metrics.auc, 0.95);
        EXPECT_GT(*o.support_f1, 0.9);
        EXPECT_LT(*o.metrics.rse, 1e-2);
        // low-rank plus sparse reproduces the observed data
        const SparseCorruption sc = gen_sparse_corruption(60, 60, 3, 0.05, 5.0, 2);
        EXPECT_LT((o.low_rank + o.sparse - sc.observed()).norm(), 1e-3 * sc.observed().norm());
    }
}

TEST(Rpca, MissingEntriesStayOffSupport) {
    RpcaConfig cfg;
    cfg.m = 30;
    cfg.n = 30;
    cfg.rank = 2;
    cfg.missing = 0.2;
    const RpcaOutcome o = run_rpca(cfg, 4);
    EXPECT_EQ(o.observed, 720);
    const ObservationSet obs = observe_with_missing(DenseMatrix::Ones(30, 30), 0.2, 4);
    DenseMatrix on = scatter_omega(obs, Vector::Ones(obs.size()));
    EXPECT_EQ((o.sparse.array() * (1.0 - on.array())).abs().maxCoeff(), 0.0);
}

TEST(Rpca, ZeroInputFileHasNoAuc) {
    const std::string path = ::testing::TempDir() + "zero_matrix.txt";
    {
        std::ofstream out(path);
        write_matrix(out, DenseMatrix::Zero(5, 4));
    }
    RpcaConfig cfg;
    cfg.input = path;
    cfg.d = 2;
    const RpcaOutcome o = run_rpca(cfg, 0);
    EXPECT_FALSE(o.metrics.auc.has_value());
    EXPECT_FALSE(o.metrics.rse.has_value());
    EXPECT_EQ(o.low_rank.norm(), 0.0);
    EXPECT_EQ(o.run.status, Status::Converged);
    std::remove(path.c_str());
}

TEST(Rpca, ConfigErrors) {
    RpcaConfig cfg;
    cfg.input = "/tmp/whatever.txt";
    EXPECT_THROW(run_rpca(cfg, 0), std::invalid_argument);
    cfg = {};
    cfg.missing = 1.0;
    EXPECT_THROW(run_rpca(cfg, 0), std::invalid_argument);
    cfg = {};
    cfg.d = 61;
    EXPECT_THROW(run_rpca(cfg, 0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Collaborative filtering pipeline

TEST(Cf, BeatsMeanPredictor) {
    const std::string path = ::testing::TempDir() + "cf_ratings.dat";
    oracle::write_synthetic_ratings(path, 60, 50, 1500, 2, 0.1, 3);
    CfConfig cfg;
    cfg.path = path;
    cfg.d_grid = {2, 4};
    cfg.mu = 5.0;
    const CfOutcome out = run_cf(cfg, 1);
    EXPECT_EQ(out.train_size + out.test_size, 1500);
    EXPECT_EQ(out.test_size, 150);
    ASSERT_EQ(out.points.size(), 2u);
    for (const CfPoint &p : out.points) {
        ASSERT_TRUE(p.rmse.has_value());
        EXPECT_LT(*p.rmse, out.mean_predictor_rmse);
    }
    cfg.d_grid = {51};
    EXPECT_THROW(run_cf(cfg, 1), std::invalid_argument);
    std::remove(path.c_str());
}

TEST(Cf, MeanPredictorMatchesOracle) {
    const std::string path = ::testing::TempDir() + "cf_mean.dat";
    oracle::write_synthetic_ratings(path, 20, 20, 200, 1, 0.5, 8);
    CfConfig cfg;
    cfg.path = path;
    cfg.d_grid = {1};
    const CfOutcome out = run_cf(cfg, 2);
    const RatingsDataset ds = split_ratings(load_ratings(path, RatingsFormat::DoubleColon), 0.9, 2);
    const double mean = ds.train.values().mean();
    const Vector diff = ds.test.values().array() - mean;
    EXPECT_NEAR(out.mean_predictor_rmse, std::sqrt(diff.squaredNorm() / diff.size()), 1e-12);
    EXPECT_DOUBLE_EQ(out.train_mean, mean);
    std::remove(path.c_str());
}

TEST(Cf, MissingFileIsRuntimeError) {
    CfConfig cfg;
    cfg.path = "/nonexistent/ratings.dat";
    EXPECT_THROW(run_cf(cfg, 0), std::runtime_error);
}
