#include "calm/acyclicity.hpp"
#include "calm/graphs.hpp"
#include "calm/harness.hpp"
#include "calm/inconsistency.hpp"
#include "calm/moral.hpp"
#include "calm/objectives.hpp"
#include "calm/sparsity.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

using namespace calm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

Matrix random_weights(int d, double scale, Rng& rng) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Matrix b(d, d);
    for (int i = 0; i < d * d; ++i) b.data()[i] = u(rng);
    b.diagonal().setZero();
    return b;
}

struct Context {
    std::uint64_t seed = 1;
    int workers = 1;
    fs::path out;
};

Outcome counterexample_check(const Context&) {
    const CounterexampleReport rep = verify_counterexample();
    std::string failed;
    for (const auto& c : rep.checks)
        if (!c.pass) failed += c.name + " ";
    return {rep.all_pass(), rep.all_pass() ? std::to_string(rep.checks.size()) + " checks" : "failed: " + failed};
}

InconsistencyConfig inconsistency_config(const Context& ctx) {
    InconsistencyConfig cfg;
    cfg.d = 8;
    cfg.er_k = 1.0;
    cfg.n_graphs = 100;
    cfg.seed = ctx.seed;
    return cfg;
}

Outcome inconsistency_study(const Context& ctx) {
    const InconsistencySummary s = run_inconsistency_experiment(inconsistency_config(ctx), ctx.workers);
    write_text(ctx.out / "inconsistency" / "inconsistency.csv", records_csv(s));
    double prop = 0.0, l0 = 0.0;
    int denser = 0;
    for (const auto& r : s.records) {
        prop += r.proportion_smaller;
        l0 += r.l0_min;
        denser += r.l0_min > r.l0_true && r.shd_cpdag > 0;
    }
    const double n = static_cast<double>(s.records.size());
    prop /= n;
    l0 /= n;
    const bool ok = prop >= 0.68 && prop <= 0.88 && denser >= 0.95 * n && l0 >= 18.0 && l0 <= 28.0;
    return {ok, "mean proportion " + fmt(prop) + ", denser and SHD>0 in " + std::to_string(denser) + "/" +
                    std::to_string(s.records.size()) + ", mean l0 " + fmt(l0)};
}

Outcome factorization(const Context& ctx) {
    Rng rng(seed_stream(ctx.seed, 3));
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const int d = 1 + t % 6;
        const Matrix s = oracle::random_spd(d, rng);
        std::vector<int> order(d);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const OrderDag od = dag_for_order(s, order);
        const auto [b, omega] = oracle::sequential_regression(s, order);
        worst = std::max({worst, (od.b - b).cwiseAbs().maxCoeff(), (od.omega - omega).cwiseAbs().maxCoeff()});
    }
    double spread = 0.0;
    for (int d = 2; d <= 5; ++d)
        for (int t = 0; t < 5; ++t) {
            const Matrix s = oracle::random_spd(d, rng);
            std::vector<int> order(d);
            std::iota(order.begin(), order.end(), 0);
            const double ref = golem_nv_loss(dag_for_order(s, order).b, s).value;
            do {
                spread = std::max(spread, std::abs(golem_nv_loss(dag_for_order(s, order).b, s).value - ref));
            } while (std::next_permutation(order.begin(), order.end()));
        }
    return {worst < 1e-9 && spread < 1e-8,
            "max coefficient error " + fmt(worst) + ", max likelihood spread " + fmt(spread)};
}

Outcome gradients(const Context& ctx) {
    Rng rng(seed_stream(ctx.seed, 4));
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u01(0.0, 1.0), uo(0.5, 3.0);
    const int instances = 100;
    std::vector<std::pair<std::string, double>> worst{{"golem", 0},   {"least_squares", 0}, {"colide_b", 0},
                                                      {"colide_omega", 0}, {"h", 0},         {"gumbel", 0},
                                                      {"stg", 0},     {"tanh", 0}};
    auto note = [&](int k, double e) { worst[k].second = std::max(worst[k].second, e); };
    for (int t = 0; t < instances; ++t) {
        const int d = 2 + t % 9;
        const Matrix s = oracle::random_spd(d, rng);
        const Matrix b = random_weights(d, 0.3, rng);

        note(0, oracle::relative_error(golem_nv_loss(b, s).grad_b,
                                       oracle::fd_gradient([&](const Matrix& x) { return golem_nv_loss(x, s).value; },
                                                           b, 1e-5)));
        note(1, oracle::relative_error(
                    least_squares_loss(b, s).grad_b,
                    oracle::fd_gradient([&](const Matrix& x) { return least_squares_loss(x, s).value; }, b, 1e-5)));

        Vector omega(d);
        for (int i = 0; i < d; ++i) omega(i) = uo(rng);
        const auto c = colide_nv_loss(b, s, omega);
        note(2, oracle::relative_error(
                    c.grad_b,
                    oracle::fd_gradient([&](const Matrix& x) { return colide_nv_loss(x, s, omega).value; }, b, 1e-5)));
        note(3, oracle::relative_error(
                    Matrix(*c.grad_omega),
                    oracle::fd_gradient([&](const Matrix& o) { return colide_nv_loss(b, s, Vector(o)).value; },
                                        Matrix(omega), 1e-5)));

        Matrix a(d, d);
        for (int i = 0; i < d * d; ++i) a.data()[i] = u01(rng);
        note(4, oracle::relative_error(h_poly(a).grad,
                                       oracle::fd_gradient([](const Matrix& x) { return h_poly(x).h; }, a, 1e-6)));

        Matrix logits(d, d), noise(d, d), mu(d, d), w(d, d);
        for (int i = 0; i < d * d; ++i) {
            logits.data()[i] = z(rng);
            noise.data()[i] = z(rng);
            mu.data()[i] = z(rng);
            const double mag = 0.02 + 0.1 * std::abs(z(rng));
            w.data()[i] = z(rng) > 0 ? mag : -mag;
        }
        const Skeleton moral = oracle::random_binary(d, 0.6, rng);
        const double tau = 0.5;
        auto gumbel_f = [&](const Matrix& x) {
            return l0_penalty_gumbel(gumbel_mask_with_noise(GumbelMask{x, tau, {}}, noise), moral).value;
        };
        const Matrix m = gumbel_mask_with_noise(GumbelMask{logits, tau, {}}, noise);
        Matrix dmask = l0_penalty_gumbel(m, moral).grad;
        dmask.diagonal().setZero();
        note(5, oracle::relative_error(gumbel_backward(m, dmask, tau), oracle::fd_gradient(gumbel_f, logits, 1e-6)));

        note(6, oracle::relative_error(
                    stg_penalty(StgParams{mu, 0.5}, moral).grad,
                    oracle::fd_gradient([&](const Matrix& x) { return stg_penalty(StgParams{x, 0.5}, moral).value; },
                                        mu, 1e-6)));
        note(7, oracle::relative_error(
                    tanh_penalty(w, TanhParams{15.0}).grad,
                    oracle::fd_gradient([](const Matrix& x) { return tanh_penalty(x, TanhParams{15.0}).value; }, w,
                                        1e-7)));
    }
    bool ok = true;
    std::string detail = std::to_string(instances) + " instances each, max rel error:";
    for (const auto& [name, e] : worst) {
        ok = ok && e < 1e-5;
        detail += " " + name + " " + fmt(e);
    }
    return {ok, detail};
}

Outcome acyclicity(const Context& ctx) {
    Rng rng(seed_stream(ctx.seed, 5));
    std::uniform_real_distribution<double> p(0.05, 0.5);
    int disagreements = 0, acyclic = 0;
    const int n = 10000;
    for (int t = 0; t < n; ++t) {
        const int d = 1 + t % 6;
        const BinaryAdjacency a = oracle::random_binary(d, p(rng), rng);
        const bool dfs = oracle::dfs_acyclic(a);
        acyclic += dfs;
        disagreements += (h_poly(a.cast<double>()).h == 0.0) != dfs;
    }
    return {disagreements == 0, std::to_string(n) + " matrices, " + std::to_string(acyclic) + " acyclic, " +
                                    std::to_string(disagreements) + " disagreements"};
}

BinaryAdjacency orient_by_random_order(const BinaryAdjacency& dag, Rng& rng) {
    const int d = static_cast<int>(dag.rows());
    std::vector<int> pos(d);
    std::iota(pos.begin(), pos.end(), 0);
    std::shuffle(pos.begin(), pos.end(), rng);
    BinaryAdjacency out = BinaryAdjacency::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (dag(i, j) || dag(j, i)) out(i, j) = pos[i] < pos[j];
    return out;
}

Outcome cpdag_oracle(const Context& ctx) {
    Rng rng(seed_stream(ctx.seed, 6));
    std::uniform_real_distribution<double> p(0.2, 0.7);
    const int n = 2000;
    int disagreements = 0, equivalent = 0, nonzero_shd = 0;
    for (int t = 0; t < n; ++t) {
        const int d = 2 + t % 4;
        const BinaryAdjacency a = oracle::random_dag(d, p(rng), rng);
        const BinaryAdjacency b = t % 2 ? orient_by_random_order(a, rng) : oracle::random_dag(d, p(rng), rng);
        const bool eq = oracle::markov_equivalent(a, b);
        const Cpdag ca = to_cpdag(a), cb = to_cpdag(b);
        disagreements += (ca == cb) != eq;
        if (eq) {
            ++equivalent;
            nonzero_shd += shd_cpdag(ca, cb) != 0;
        }
    }
    return {disagreements == 0 && nonzero_shd == 0,
            std::to_string(n) + " pairs, " + std::to_string(equivalent) + " equivalent, " +
                std::to_string(disagreements) + " disagreements, " + std::to_string(nonzero_shd) +
                " equivalent pairs with SHD > 0"};
}

Outcome moral_recovery(const Context& ctx) {
    SimConfig sc;
    sc.d = 8;
    sc.er_k = 1.0;
    int exact = 0;
    double worst_f1 = 1.0;
    const int graphs = 20;
    for (int g = 0; g < graphs; ++g) {
        Rng rng(seed_stream(seed_stream(ctx.seed, 7), g));
        const SemSpec sem = simulate_sem(sc, rng);
        const CovarianceInput in = CovarianceInput::from_samples(sample_data(sem, 100000, rng));
        const Skeleton est = estimate_moral(in, CiConfig{});
        const Skeleton truth = moralize(support(sem.b_true));
        if (est == truth) {
            ++exact;
            continue;
        }
        const EvalMetrics m = skeleton_metrics(est, truth);
        const double pr = m.skeleton_precision, rc = m.skeleton_recall;
        worst_f1 = std::min(worst_f1, pr + rc > 0 ? 2 * pr * rc / (pr + rc) : 0.0);
    }
    return {exact >= 0.9 * graphs && worst_f1 >= 0.95,
            std::to_string(exact) + "/" + std::to_string(graphs) + " exact, worst F1 otherwise " + fmt(worst_f1)};
}

ExperimentConfig desk_config(const Context& ctx) {
    ExperimentConfig cfg;
    cfg.d = 20;
    cfg.er_k = 1.0;
    cfg.sample_mode = SampleMode::infinite;
    cfg.standardize = true;
    cfg.moral = "exact";
    cfg.repetitions = 10;
    cfg.seed = ctx.seed;
    cfg.workers = ctx.workers;
    cfg.record_timing = false;
    return cfg;
}

ExperimentResult run_and_write(const ExperimentConfig& cfg, const fs::path& dir) {
    const ExperimentResult res = run_experiment(cfg);
    write_results(res, dir, to_ini(cfg));
    return res;
}

std::string shd_text(const MethodSummary& s) {
    return fmt(s.shd_cpdag.mean) + "+-" + fmt(s.shd_cpdag.stderr_);
}

// mean_a is no worse than mean_b, or the gap is within the standard error of the difference of the two means
bool ordered(const MethodSummary& a, const MethodSummary& b) {
    const double se = std::hypot(a.shd_cpdag.stderr_, b.shd_cpdag.stderr_);
    return a.shd_cpdag.mean <= b.shd_cpdag.mean + se;
}

bool clean(const MethodSummary& s, int reps) { return s.failures == 0 && s.runs == reps; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance suite"};
    Context ctx;
    const char* env = std::getenv("CALM_OUTPUT_DIR");
    std::string out = env && *env ? (fs::path(env) / "acceptance").string() : "acceptance_output";
    std::vector<int> only, known;
    app.add_option("--seed", ctx.seed, "master seed")->capture_default_str();
    app.add_option("--workers", ctx.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--out", out, "output directory")->capture_default_str();
    app.add_option("--only", only, "run only these criteria")->delimiter(',')->check(CLI::Range(1, 11));
    app.add_option("--known-failure", known, "criteria whose failure does not change the exit status")
        ->delimiter(',')
        ->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);
    ctx.out = out;

    auto wanted = [&](int k) { return only.empty() || std::find(only.begin(), only.end(), k) != only.end(); };
    int failures = 0;
    auto report = [&](int k, const std::string& name, const Outcome& o) {
        const bool is_known = std::find(known.begin(), known.end(), k) != known.end();
        std::cout << (o.pass ? "PASS " : "FAIL ") << k << " " << name << " [" << o.detail << "]"
                  << (!o.pass && is_known ? " (known failure)" : "") << std::endl;
        failures += !o.pass && !is_known;
    };
    auto guarded = [&](int k, const std::string& name, auto&& fn) {
        if (!wanted(k)) return;
        try {
            report(k, name, fn(ctx));
        } catch (const std::exception& e) {
            report(k, name, Outcome{false, std::string("error: ") + e.what()});
        }
    };

    guarded(1, "counterexample", counterexample_check);
    guarded(2, "inconsistency", inconsistency_study);
    guarded(3, "factorization", factorization);
    guarded(4, "gradients", gradients);
    guarded(5, "acyclicity", acyclicity);
    guarded(6, "cpdag", cpdag_oracle);
    guarded(7, "moral-recovery", moral_recovery);

    const bool need_desk = wanted(8) || wanted(9) || wanted(10);
    const bool need_raw = wanted(10) || wanted(11);
    ExperimentResult desk, raw;
    std::string desk_error, raw_error;
    ExperimentConfig desk_cfg = desk_config(ctx);
    desk_cfg.methods = {"calm", "golem-nv-l1", "soft-moral", "soft-no-moral"};
    ExperimentConfig raw_cfg = desk_config(ctx);
    raw_cfg.methods = {"calm"};
    raw_cfg.standardize = false;
    try {
        if (need_desk) desk = run_and_write(desk_cfg, ctx.out / "desk");
    } catch (const std::exception& e) {
        desk_error = e.what();
    }
    try {
        if (need_raw) raw = run_and_write(raw_cfg, ctx.out / "raw");
    } catch (const std::exception& e) {
        raw_error = e.what();
    }
    const int reps = desk_cfg.repetitions;

    guarded(8, "calm-vs-golem", [&](const Context&) {
        if (!desk_error.empty()) return Outcome{false, "error: " + desk_error};
        const MethodSummary& c = desk.summary.at("calm");
        const MethodSummary& g = desk.summary.at("golem-nv-l1");
        return Outcome{clean(c, reps) && clean(g, reps) && c.shd_cpdag.mean < g.shd_cpdag.mean && c.recall.mean >= 0.9,
                       "calm shd " + shd_text(c) + " recall " + fmt(c.recall.mean) + ", golem-nv-l1 shd " +
                           shd_text(g)};
    });
    guarded(9, "constraint-ablation", [&](const Context&) {
        if (!desk_error.empty()) return Outcome{false, "error: " + desk_error};
        const MethodSummary& h = desk.summary.at("calm");
        const MethodSummary& s = desk.summary.at("soft-moral");
        const MethodSummary& n = desk.summary.at("soft-no-moral");
        return Outcome{clean(h, reps) && clean(s, reps) && clean(n, reps) && ordered(h, s) && ordered(s, n),
                       "hard+moral " + shd_text(h) + ", soft+moral " + shd_text(s) + ", soft-no-moral " +
                           shd_text(n)};
    });
    guarded(10, "standardization", [&](const Context&) {
        if (!desk_error.empty() || !raw_error.empty()) return Outcome{false, "error: " + desk_error + raw_error};
        const MethodSummary& a = desk.summary.at("calm");
        const MethodSummary& b = raw.summary.at("calm");
        const double lo = std::min(a.shd_cpdag.mean, b.shd_cpdag.mean);
        const double hi = std::max(a.shd_cpdag.mean, b.shd_cpdag.mean);
        const double ratio = hi == 0.0 ? 1.0 : (lo == 0.0 ? INFINITY : hi / lo);
        return Outcome{clean(a, reps) && clean(b, reps) && ratio < 2.0,
                       "standardized " + shd_text(a) + ", raw " + shd_text(b) + ", ratio " + fmt(ratio)};
    });
    guarded(11, "determinism", [&](const Context& c) {
        if (!raw_error.empty()) return Outcome{false, "error: " + raw_error};
        run_and_write(raw_cfg, c.out / "raw_rerun");
        const bool bench_same = slurp(c.out / "raw" / "results.csv") == slurp(c.out / "raw_rerun" / "results.csv");
        const std::string first = records_csv(run_inconsistency_experiment(inconsistency_config(c), c.workers));
        const std::string second = records_csv(run_inconsistency_experiment(inconsistency_config(c), c.workers));
        const bool inc_same = first == second;
        return Outcome{bench_same && inc_same, std::string("benchmark CSV ") + (bench_same ? "identical" : "differs") +
                                                   ", inconsistency CSV " + (inc_same ? "identical" : "differs")};
    });

    return failures == 0 ? 0 : 1;
}
