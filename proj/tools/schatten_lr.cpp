// schatten-lr: experiment harness for bi-trace / tri-trace low-rank recovery.

#include "schatten.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace schatten;

namespace {

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Output helpers

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string cell(const std::optional<double> &v) { return v ? fmt(*v) : std::string(); }

void write_file_atomic(const fs::path &path, const std::string &content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out)
            throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string trace_csv(const SolverTrace &trace) {
    std::ostringstream os;
    os << "iter,objective,feasibility,step_u,step_v,step_w,beta,iterate_delta\n";
    os << "0," << fmt(trace.initial_objective) << ",,,,,,\n";
    for (std::size_t k = 0; k < trace.rows.size(); ++k) {
        const TraceRow &r = trace.rows[k];
        os << k + 1 << ',' << fmt(r.objective) << ',' << cell(r.feasibility) << ','
           << fmt(r.step_u) << ',' << fmt(r.step_v) << ',' << cell(r.step_w) << ','
           << cell(r.beta) << ',' << fmt(r.iterate_delta) << '\n';
    }
    return os.str();
}

std::string matrix_text(const DenseMatrix &m) {
    std::ostringstream os;
    write_matrix(os, m);
    return os.str();
}

json metrics_json(const EvalReport &r) {
    json j = json::object();
    auto put = [&](const char *key, const std::optional<double> &v) {
        if (v && std::isfinite(*v))
            j[key] = *v;
    };
    put("rse", r.rse);
    put("rmse", r.rmse);
    put("auc", r.auc);
    put("c1", r.c1);
    put("c3", r.c3);
    put("c3_lower_bound", r.c3_lower_bound);
    return j;
}

void put_run(json &j, const RunSummary &run) {
    j["status"] = run.failed() ? "failed" : std::string(to_string(run.status));
    j["iterations"] = run.iterations;
    j["kkt_residual"] = run.kkt_residual;
}

struct Stats {
    std::size_t count = 0;
    double mean = 0.0;
    double std = 0.0;
};

Stats stats(const std::vector<double> &xs) {
    Stats s;
    s.count = xs.size();
    if (xs.empty())
        return s;
    for (double x : xs)
        s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs)
            ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

std::string stat_cells(const std::vector<double> &xs) {
    if (xs.empty())
        return ",";
    const Stats s = stats(xs);
    return fmt(s.mean) + ',' + fmt(s.std);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string trial_stem(std::string_view prefix, int index) {
    std::ostringstream os;
    os << prefix << "_trial_" << std::setw(3) << std::setfill('0') << index;
    return os.str();
}

// ---------------------------------------------------------------------------
// Workers

unsigned worker_count(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("SCHATTEN_LR_THREADS")) {
        char *end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || cap < 1)
            throw UsageError("SCHATTEN_LR_THREADS must be a positive integer, got \"" +
                             std::string(env) + "\"");
        n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

/// Runs fn(0..jobs-1) on a small pool; results must be stored by index.
template <class Fn>
void parallel_for(std::size_t jobs, Fn &&fn) {
    const unsigned workers = worker_count(jobs);
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < jobs; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (auto &t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

fs::path prepare_out_dir(const std::string &dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec || !fs::is_directory(p))
        throw std::runtime_error("cannot create output directory " + dir);
    return p;
}

// ---------------------------------------------------------------------------
// Subcommands

std::vector<Penalty> penalties_from(const std::string &name) {
    if (name == "bitr")
        return {Penalty::BiTrace};
    if (name == "tritr")
        return {Penalty::TriTrace};
    return {Penalty::BiTrace, Penalty::TriTrace};
}

std::string palm_name(Penalty p) { return p == Penalty::BiTrace ? "palm_bitr_mc" : "palm_tritr_mc"; }
std::string ladm_name(Penalty p) { return p == Penalty::BiTrace ? "ladm_bitr" : "ladm_tritr"; }

struct SynthOptions {
    SynthMcConfig cfg;
    std::string solver = "bitr";
    int trials = 10;
    std::uint64_t seed = 0;
    std::string out = "synth-mc-out";
    std::optional<Index> d;
    std::optional<double> baseline_mu;
    bool no_baseline = false;
};

int cmd_synth_mc(const SynthOptions &opt) {
    const std::vector<Penalty> penalties = penalties_from(opt.solver);
    std::vector<SynthMcConfig> cfgs;
    try {
        for (Penalty p : penalties) {
            SynthMcConfig c = opt.cfg;
            c.penalty = p;
            c.d = opt.d;
            c.baseline_mu = opt.baseline_mu;
            c.run_baseline = !opt.no_baseline;
            c.validate();
            cfgs.push_back(c);
        }
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    const fs::path dir = prepare_out_dir(opt.out);

    struct Slot {
        SynthMcTrial trial;
        double solver_seconds = 0.0;
    };
    const std::size_t per = static_cast<std::size_t>(opt.trials);
    std::vector<Slot> slots(cfgs.size() * per);
    parallel_for(slots.size(), [&](std::size_t job) {
        const SynthMcConfig &cfg = cfgs[job / per];
        const int index = static_cast<int>(job % per);
        const std::uint64_t seed = opt.seed + static_cast<std::uint64_t>(index);
        const auto start = std::chrono::steady_clock::now();
        Slot &slot = slots[job];
        slot.trial = run_synth_mc_trial(cfg, seed);
        slot.solver_seconds = seconds_since(start);

        const std::string stem = trial_stem(to_string(cfg.penalty), index);
        const std::string trace_name = stem + "_trace.csv";
        json j;
        j["instance"] = {{"kind", "synthetic_mc"}, {"m", cfg.m}, {"n", cfg.n},
                         {"rank", cfg.rank},       {"sr", cfg.sr}, {"nf", cfg.nf},
                         {"seed", seed},           {"observed", slot.trial.observed}};
        j["solver"] = {{"name", palm_name(cfg.penalty)},
                       {"d", cfg.inner_rank()},
                       {"mu", cfg.mu},
                       {"max_iters", cfg.max_iters},
                       {"rel_tol", cfg.rel_tol},
                       {"init", "spectral"}};
        put_run(j, slot.trial.run);
        j["metrics"] = metrics_json(slot.trial.metrics);
        if (slot.trial.baseline_mu) {
            json b = {{"name", "trace_baseline_mc"},
                      {"mu", *slot.trial.baseline_mu},
                      {"iters", cfg.baseline_iters}};
            if (slot.trial.baseline_rse)
                b["rse"] = *slot.trial.baseline_rse;
            j["baseline"] = b;
        }
        j["trace_path"] = trace_name;
        if (slot.trial.run.error)
            j["error"] = *slot.trial.run.error;
        j["timing"] = {{"wall_seconds", slot.solver_seconds}};
        write_file_atomic(dir / trace_name, trace_csv(slot.trial.run.trace));
        write_file_atomic(dir / (stem + ".json"), j.dump(2) + "\n");
    });

    std::ostringstream agg;
    agg << "solver,trials,failed,rse_mean,rse_std,iterations_mean,iterations_std,wall_mean,wall_std\n";
    std::size_t failures = 0;
    std::vector<double> base_rse;
    for (std::size_t c = 0; c < cfgs.size(); ++c) {
        std::vector<double> rses, iters, walls;
        std::size_t failed = 0;
        for (std::size_t t = 0; t < per; ++t) {
            const Slot &s = slots[c * per + t];
            walls.push_back(s.solver_seconds);
            if (s.trial.run.failed()) {
                ++failed;
                continue;
            }
            iters.push_back(s.trial.run.iterations);
            if (s.trial.metrics.rse)
                rses.push_back(*s.trial.metrics.rse);
            if (c == 0 && s.trial.baseline_rse)
                base_rse.push_back(*s.trial.baseline_rse);
        }
        failures += failed;
        agg << to_string(cfgs[c].penalty) << ',' << per << ',' << failed << ','
            << stat_cells(rses) << ',' << stat_cells(iters) << ',' << stat_cells(walls) << '\n';
    }
    if (!opt.no_baseline) {
        const std::vector<double> iters(base_rse.size(), cfgs[0].baseline_iters);
        agg << "trace," << per << ',' << per - base_rse.size() << ',' << stat_cells(base_rse)
            << ',' << stat_cells(iters) << ",,\n";
    }
    write_file_atomic(dir / "aggregate.csv", agg.str());
    std::cout << "synth-mc: " << slots.size() - failures << "/" << slots.size()
              << " runs succeeded; results in " << dir.string() << "\n";
    return failures == slots.size() ? 1 : 0;
}

struct RpcaOptions {
    RpcaConfig cfg;
    std::string solver = "bitr";
    std::string loss = "l1";
    int trials = 1;
    std::uint64_t seed = 0;
    std::string out = "rpca-out";
    std::optional<std::string> input;
    std::optional<Index> d;
    std::optional<double> mu;
    std::optional<double> beta0;
};

int cmd_rpca(const RpcaOptions &opt) {
    RpcaConfig cfg = opt.cfg;
    cfg.penalty = opt.solver == "tritr" ? Penalty::TriTrace : Penalty::BiTrace;
    cfg.loss = opt.loss == "lhalf" ? Loss::LHalf : Loss::L1;
    cfg.input = opt.input;
    cfg.d = opt.d;
    cfg.mu = opt.mu;
    cfg.beta0 = opt.beta0;
    try {
        cfg.validate();
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    if (cfg.input && !fs::exists(*cfg.input))
        throw std::runtime_error("cannot open matrix file: " + *cfg.input);
    const fs::path dir = prepare_out_dir(opt.out);

    struct Slot {
        RpcaOutcome outcome;
        double seconds = 0.0;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(opt.trials));
    parallel_for(slots.size(), [&](std::size_t job) {
        const int index = static_cast<int>(job);
        const std::uint64_t seed = opt.seed + static_cast<std::uint64_t>(index);
        const auto start = std::chrono::steady_clock::now();
        Slot &slot = slots[job];
        slot.outcome = run_rpca(cfg, seed);
        slot.seconds = seconds_since(start);
        const RpcaOutcome &o = slot.outcome;

        const std::string stem = trial_stem("rpca", index);
        json inst;
        if (cfg.input)
            inst = {{"kind", "matrix_file"}, {"path", *cfg.input}};
        else
            inst = {{"kind", "synthetic_sparse"},
                    {"rank", cfg.rank},
                    {"spike_fraction", cfg.spike_fraction},
                    {"spike_magnitude", cfg.spike_magnitude}};
        inst["m"] = o.rows;
        inst["n"] = o.cols;
        inst["missing"] = cfg.missing;
        inst["seed"] = seed;
        inst["observed"] = o.observed;
        json j;
        j["instance"] = inst;
        j["solver"] = {{"name", ladm_name(cfg.penalty)},
                       {"loss", to_string(cfg.loss)},
                       {"d", o.inner_rank},
                       {"mu", o.mu},
                       {"rho", cfg.rho},
                       {"eps", cfg.eps},
                       {"max_iters", cfg.max_iters},
                       {"init", "gaussian"}};
        if (cfg.beta0)
            j["solver"]["beta0"] = *cfg.beta0;
        put_run(j, o.run);
        json metrics = metrics_json(o.metrics);
        if (o.support_f1)
            metrics["support_f1"] = *o.support_f1;
        j["metrics"] = metrics;
        j["trace_path"] = stem + "_trace.csv";
        if (o.run.error) {
            j["error"] = *o.run.error;
        } else {
            j["low_rank_path"] = stem + "_low_rank.txt";
            j["sparse_path"] = stem + "_sparse.txt";
            write_file_atomic(dir / (stem + "_low_rank.txt"), matrix_text(o.low_rank));
            write_file_atomic(dir / (stem + "_sparse.txt"), matrix_text(o.sparse));
        }
        j["timing"] = {{"wall_seconds", slot.seconds}};
        write_file_atomic(dir / (stem + "_trace.csv"), trace_csv(o.run.trace));
        write_file_atomic(dir / (stem + ".json"), j.dump(2) + "\n");
    });

    std::vector<double> rses, aucs, iters, walls;
    std::size_t failed = 0;
    for (const Slot &s : slots) {
        walls.push_back(s.seconds);
        if (s.outcome.run.failed()) {
            ++failed;
            continue;
        }
        iters.push_back(s.outcome.run.iterations);
        if (s.outcome.metrics.rse)
            rses.push_back(*s.outcome.metrics.rse);
        if (s.outcome.metrics.auc)
            aucs.push_back(*s.outcome.metrics.auc);
    }
    std::ostringstream agg;
    agg << "solver,trials,failed,rse_mean,rse_std,auc_mean,auc_std,iterations_mean,"
           "iterations_std,wall_mean,wall_std\n";
    agg << to_string(cfg.penalty) << ',' << slots.size() << ',' << failed << ','
        << stat_cells(rses) << ',' << stat_cells(aucs) << ',' << stat_cells(iters) << ','
        << stat_cells(walls) << '\n';
    write_file_atomic(dir / "aggregate.csv", agg.str());
    std::cout << "rpca: " << slots.size() - failed << "/" << slots.size()
              << " runs succeeded; results in " << dir.string() << "\n";
    return failed == slots.size() ? 1 : 0;
}

struct CfOptions {
    CfConfig cfg;
    std::string solver = "bitr";
    std::string format = "doublecolon";
    std::uint64_t seed = 0;
    std::string out = "cf-out";
};

RatingsFormat format_from(const std::string &name) {
    if (name == "comma")
        return RatingsFormat::Comma;
    if (name == "tab")
        return RatingsFormat::Tab;
    return RatingsFormat::DoubleColon;
}

int cmd_cf(const CfOptions &opt) {
    CfConfig cfg = opt.cfg;
    cfg.penalty = opt.solver == "tritr" ? Penalty::TriTrace : Penalty::BiTrace;
    cfg.format = format_from(opt.format);
    try {
        cfg.validate();
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    const fs::path dir = prepare_out_dir(opt.out);
    const auto start = std::chrono::steady_clock::now();
    const CfOutcome o = run_cf(cfg, opt.seed);
    const double seconds = seconds_since(start);

    std::ostringstream csv;
    csv << "d,rmse,mean_predictor_rmse,status,iterations\n";
    std::size_t failed = 0;
    for (const CfPoint &pt : o.points) {
        const std::string stem = "cf_d" + std::to_string(pt.d);
        json j;
        j["instance"] = {{"kind", "ratings"},
                         {"path", cfg.path},
                         {"format", opt.format},
                         {"train_fraction", cfg.train_fraction},
                         {"seed", opt.seed},
                         {"users", o.users},
                         {"items", o.items},
                         {"train", o.train_size},
                         {"test", o.test_size},
                         {"train_mean", o.train_mean}};
        j["solver"] = {{"name", palm_name(cfg.penalty)},
                       {"d", pt.d},
                       {"mu", cfg.mu},
                       {"max_iters", cfg.max_iters},
                       {"rel_tol", cfg.rel_tol},
                       {"init", "spectral"}};
        put_run(j, pt.run);
        EvalReport report;
        report.rmse = pt.rmse;
        j["metrics"] = metrics_json(report);
        j["mean_predictor_rmse"] = o.mean_predictor_rmse;
        j["trace_path"] = stem + "_trace.csv";
        if (pt.run.error) {
            j["error"] = *pt.run.error;
            ++failed;
        }
        write_file_atomic(dir / (stem + "_trace.csv"), trace_csv(pt.run.trace));
        write_file_atomic(dir / (stem + ".json"), j.dump(2) + "\n");
        csv << pt.d << ',' << cell(pt.rmse) << ',' << fmt(o.mean_predictor_rmse) << ','
            << (pt.run.failed() ? "failed" : std::string(to_string(pt.run.status))) << ','
            << pt.run.iterations << '\n';
    }
    write_file_atomic(dir / "rmse_vs_d.csv", csv.str());
    std::cout << "cf: " << o.users << " users, " << o.items << " items, " << o.train_size
              << " train / " << o.test_size << " test; mean predictor RMSE "
              << fmt(o.mean_predictor_rmse) << "\n";
    for (const CfPoint &pt : o.points)
        std::cout << "  d=" << pt.d << " rmse=" << cell(pt.rmse) << "\n";
    std::cout << "elapsed " << seconds << " s; results in " << dir.string() << "\n";
    return failed == o.points.size() ? 1 : 0;
}

struct VerifyOptions {
    CertificationConfig cfg;
    bool inject_fault = false;
    std::optional<std::string> out;
};

int cmd_verify(const VerifyOptions &opt) {
    CertificationConfig cfg = opt.cfg;
    if (opt.inject_fault)
        cfg.bi_trace_fault = 1e-3;
    try {
        cfg.validate();
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    const std::vector<CheckResult> checks = run_certification(cfg);
    bool all = true;
    json report = json::array();
    for (const CheckResult &c : checks) {
        all = all && c.passed();
        std::cout << (c.passed() ? "PASS " : "FAIL ") << c.name << " cases=" << c.cases
                  << " max_deviation=" << fmt(c.max_deviation) << " tolerance=" << fmt(c.tolerance)
                  << "\n";
        report.push_back({{"name", c.name},
                          {"cases", c.cases},
                          {"max_deviation", c.max_deviation},
                          {"tolerance", c.tolerance},
                          {"passed", c.passed()}});
    }
    if (opt.out) {
        const fs::path p(*opt.out);
        if (p.has_parent_path())
            prepare_out_dir(p.parent_path().string());
        json j = {{"trials", cfg.trials},
                  {"max_dim", cfg.max_dim},
                  {"seed", cfg.seed},
                  {"fault", cfg.bi_trace_fault},
                  {"checks", report},
                  {"passed", all}};
        write_file_atomic(p, j.dump(2) + "\n");
    }
    std::cout << (all ? "all checks passed" : "certification FAILED") << "\n";
    return all ? 0 : 1;
}

CLI::Validator unit_interval(bool include_zero, bool include_one) {
    return CLI::Validator(
        [=](std::string &s) -> std::string {
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(s, &used);
                if (used != s.size())
                    return "not a number: " + s;
            } catch (const std::exception &) {
                return "not a number: " + s;
            }
            const bool lo = include_zero ? v >= 0.0 : v > 0.0;
            const bool hi = include_one ? v <= 1.0 : v < 1.0;
            if (!lo || !hi)
                return "value " + s + " must lie in " + (include_zero ? "[0, " : "(0, ") +
                       (include_one ? "1]" : "1)");
            return {};
        },
        "FRACTION");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Low-rank matrix recovery with bi-trace and tri-trace quasi-norms"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "schatten-lr 1.0");

    SynthOptions synth;
    auto *s = app.add_subcommand("synth-mc", "Synthetic matrix completion trials");
    s->add_option("--m", synth.cfg.m, "Rows")->check(CLI::PositiveNumber);
    s->add_option("--n", synth.cfg.n, "Columns")->check(CLI::PositiveNumber);
    s->add_option("--rank", synth.cfg.rank, "True rank")->check(CLI::NonNegativeNumber);
    s->add_option("--sr", synth.cfg.sr, "Sampling ratio in (0, 1]")->check(unit_interval(false, true));
    s->add_option("--nf", synth.cfg.nf, "Noise factor")->check(CLI::NonNegativeNumber);
    s->add_option("--d", synth.d, "Inner rank (default floor(1.25 rank))")->check(CLI::PositiveNumber);
    s->add_option("--solver", synth.solver, "bitr, tritr or both")
        ->check(CLI::IsMember({"bitr", "tritr", "both"}));
    s->add_option("--mu", synth.cfg.mu, "Regularization weight")->check(CLI::PositiveNumber);
    s->add_option("--max-iters", synth.cfg.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    s->add_option("--rel-tol", synth.cfg.rel_tol, "Relative iterate-change tolerance")
        ->check(CLI::PositiveNumber);
    s->add_option("--baseline-mu", synth.baseline_mu, "Trace-norm baseline weight")
        ->check(CLI::NonNegativeNumber);
    s->add_option("--baseline-iters", synth.cfg.baseline_iters, "Trace-norm baseline iterations")
        ->check(CLI::PositiveNumber);
    s->add_flag("--no-baseline", synth.no_baseline, "Skip the trace-norm baseline");
    s->add_option("--trials", synth.trials, "Number of trials")->check(CLI::PositiveNumber);
    s->add_option("--seed", synth.seed, "Base seed; trial k uses seed + k");
    s->add_option("--out", synth.out, "Output directory");

    RpcaOptions rpca;
    auto *r = app.add_subcommand("rpca", "Low-rank + sparse separation with LADM");
    r->add_option("--input", rpca.input, "Dense matrix file (default: synthetic instance)");
    r->add_option("--m", rpca.cfg.m, "Rows")->check(CLI::PositiveNumber);
    r->add_option("--n", rpca.cfg.n, "Columns")->check(CLI::PositiveNumber);
    r->add_option("--rank", rpca.cfg.rank, "True rank")->check(CLI::NonNegativeNumber);
    r->add_option("--spike-fraction", rpca.cfg.spike_fraction, "Fraction of corrupted cells")
        ->check(unit_interval(true, true));
    r->add_option("--spike-magnitude", rpca.cfg.spike_magnitude, "Spikes are uniform on [-a, a]")
        ->check(CLI::NonNegativeNumber);
    r->add_option("--missing", rpca.cfg.missing, "Fraction of unobserved cells")
        ->check(unit_interval(true, false));
    r->add_option("--d", rpca.d, "Inner rank (default floor(1.25 rank))")->check(CLI::PositiveNumber);
    r->add_option("--solver", rpca.solver, "bitr or tritr")->check(CLI::IsMember({"bitr", "tritr"}));
    r->add_option("--loss", rpca.loss, "l1 or lhalf")->check(CLI::IsMember({"l1", "lhalf"}));
    r->add_option("--mu", rpca.mu, "Regularization weight (default sqrt(max(m, n)))")
        ->check(CLI::PositiveNumber);
    r->add_option("--beta0", rpca.beta0, "Initial penalty")->check(CLI::PositiveNumber);
    r->add_option("--rho", rpca.cfg.rho, "Penalty growth factor");
    r->add_option("--eps", rpca.cfg.eps, "Feasibility tolerance")->check(CLI::PositiveNumber);
    r->add_option("--max-iters", rpca.cfg.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    r->add_option("--trials", rpca.trials, "Number of trials")->check(CLI::PositiveNumber);
    r->add_option("--seed", rpca.seed, "Base seed; trial k uses seed + k");
    r->add_option("--out", rpca.out, "Output directory");

    CfOptions cf;
    auto *c = app.add_subcommand("cf", "Collaborative filtering on a ratings file");
    c->add_option("--ratings", cf.cfg.path, "Ratings file")->required();
    c->add_option("--format", cf.format, "doublecolon, comma or tab")
        ->check(CLI::IsMember({"doublecolon", "comma", "tab"}));
    c->add_option("--train-fraction", cf.cfg.train_fraction, "Training share in (0, 1)")
        ->check(unit_interval(false, false));
    c->add_option("--d-grid", cf.cfg.d_grid, "Inner ranks to evaluate")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    c->add_option("--solver", cf.solver, "bitr or tritr")->check(CLI::IsMember({"bitr", "tritr"}));
    c->add_option("--mu", cf.cfg.mu, "Regularization weight")->check(CLI::PositiveNumber);
    c->add_option("--max-iters", cf.cfg.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    c->add_option("--rel-tol", cf.cfg.rel_tol, "Relative iterate-change tolerance")
        ->check(CLI::PositiveNumber);
    c->add_option("--seed", cf.seed, "Split seed");
    c->add_option("--out", cf.out, "Output directory");

    VerifyOptions verify;
    auto *v = app.add_subcommand("verify", "Run the norm certification battery");
    v->add_option("--trials", verify.cfg.trials, "Random matrices")->check(CLI::PositiveNumber);
    v->add_option("--max-dim", verify.cfg.max_dim, "Largest row / column count")
        ->check(CLI::PositiveNumber);
    v->add_option("--factorizations", verify.cfg.factorizations,
                  "Random factorizations per matrix")
        ->check(CLI::PositiveNumber);
    v->add_option("--seed", verify.cfg.seed, "Base seed");
    v->add_option("--tolerance", verify.cfg.tolerance, "Relative tolerance")
        ->check(CLI::PositiveNumber);
    v->add_flag("--inject-fault", verify.inject_fault,
                "Test hook: perturb bi_trace by 1e-3 so the battery must fail");
    v->add_option("--out", verify.out, "Write the report as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*s)
            return cmd_synth_mc(synth);
        if (*r)
            return cmd_rpca(rpca);
        if (*c)
            return cmd_cf(cf);
        return cmd_verify(verify);
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
