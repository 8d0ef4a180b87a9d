#include "calm/graphs.hpp"
#include "calm/harness.hpp"
#include "calm/inconsistency.hpp"
#include "calm/io.hpp"
#include "calm/learners.hpp"
#include "calm/moral.hpp"
#include "calm/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

fs::path default_output_dir() {
    if (const char* env = std::getenv("CALM_OUTPUT_DIR"); env && *env) return env;
    return "calm_output";
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + p.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + p.string());
    os << text;
    if (!os) throw std::runtime_error("write failed: " + p.string());
}

struct Common {
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
    sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--out", c.out, "output directory (default: $CALM_OUTPUT_DIR or ./calm_output)");
}

fs::path out_dir(const Common& c) { return c.out.empty() ? default_output_dir() : fs::path(c.out); }

struct InputArgs {
    std::string data, cov;
    long n = 0;
    bool standardize = false;
};

void add_input(CLI::App* sub, InputArgs& in) {
    auto* data = sub->add_option("--data", in.data, "n x d sample matrix");
    auto* cov = sub->add_option("--cov", in.cov, "d x d covariance matrix");
    data->excludes(cov);
    sub->add_option("--n", in.n, "sample size attached to --cov (needed for CI tests)");
    sub->add_flag("--standardize", in.standardize, "scale variables to unit variance");
}

calm::CovarianceInput load_input(const InputArgs& in) {
    calm::CovarianceInput ci;
    if (!in.data.empty()) ci = calm::CovarianceInput::from_samples(calm::io::read_matrix(fs::path(in.data)));
    else if (!in.cov.empty())
        ci = calm::CovarianceInput::from_population(calm::io::read_matrix(fs::path(in.cov)),
                                                    in.n > 0 ? std::optional<long>(in.n) : std::nullopt);
    else throw CLI::ValidationError("one of --data or --cov is required");
    return in.standardize ? calm::standardize(ci) : ci;
}

json metrics_json(const calm::EvalMetrics& m) {
    return {{"shd_cpdag", m.shd_cpdag}, {"precision", m.skeleton_precision}, {"recall", m.skeleton_recall}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CALM: causal structure learning with a moral-graph filter and Gumbel-Softmax masks"};
    app.set_config("--config", "", "INI file; [subcommand] sections set subcommand options");
    app.require_subcommand(1);

    // simulate
    Common sim_c;
    calm::SimConfig sim;
    long sim_n = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "draw an ER DAG, weights, noise, and optionally samples");
    add_common(sim_cmd, sim_c);
    sim_cmd->add_option("--d", sim.d, "number of nodes")->capture_default_str();
    sim_cmd->add_option("--k", sim.er_k, "expected edges per node")->capture_default_str();
    sim_cmd->add_option("--n", sim_n, "samples to draw (0: none)")->capture_default_str();

    // moral
    Common mor_c;
    InputArgs mor_in;
    double mor_alpha = 0.05;
    auto* mor_cmd = app.add_subcommand("moral", "estimate the moral graph with IAMB");
    add_common(mor_cmd, mor_c);
    add_input(mor_cmd, mor_in);
    mor_cmd->add_option("--alpha", mor_alpha, "Fisher-Z significance level")->capture_default_str();

    // learn
    Common lrn_c;
    InputArgs lrn_in;
    std::string method = "calm", objective, relaxation, constraint, moral_file;
    std::optional<double> lambda1, lambda2, threshold;
    long iters = 0;
    auto* lrn_cmd = app.add_subcommand("learn", "fit one method on a data or covariance file");
    add_common(lrn_cmd, lrn_c);
    add_input(lrn_cmd, lrn_in);
    lrn_cmd->add_option("--method", method, "preset name")->check(CLI::IsMember(calm::method_names()))->capture_default_str();
    lrn_cmd->add_option("--objective", objective, "golem-nv | least-squares | colide-nv");
    lrn_cmd->add_option("--relaxation", relaxation, "gumbel | stg | tanh | l1-direct");
    lrn_cmd->add_option("--constraint", constraint, "hard-qpm | soft");
    lrn_cmd->add_option("--lambda1", lambda1, "sparsity weight");
    lrn_cmd->add_option("--lambda2", lambda2, "soft constraint weight");
    lrn_cmd->add_option("--threshold", threshold, "edge threshold");
    lrn_cmd->add_option("--iters", iters, "Adam iterations per subproblem (soft: total)");
    lrn_cmd->add_option("--moral", moral_file, "skeleton file; omitted: full skeleton");

    // evaluate
    std::string est_file, truth_file;
    auto* eval_cmd = app.add_subcommand("evaluate", "SHD of CPDAGs and skeleton precision/recall");
    eval_cmd->add_option("--est", est_file, "estimated adjacency")->required();
    eval_cmd->add_option("--truth", truth_file, "true adjacency")->required();

    // bench
    Common bench_c;
    calm::ExperimentConfig exp;
    std::string samples = "infinite";
    bool no_standardize = false, no_timing = false;
    auto* bench_cmd = app.add_subcommand("bench", "repeated simulate/fit/evaluate over a method list");
    add_common(bench_cmd, bench_c);
    bench_cmd->add_option("--d", exp.d, "number of nodes")->capture_default_str();
    bench_cmd->add_option("--k", exp.er_k, "expected edges per node")->capture_default_str();
    bench_cmd->add_option("--samples", samples, "'infinite' or a sample size")->capture_default_str();
    bench_cmd->add_flag("--no-standardize", no_standardize, "keep raw variable scales");
    bench_cmd->add_option("--methods", exp.methods, "comma-separated presets")->delimiter(',')->check(CLI::IsMember(calm::method_names()));
    bench_cmd->add_option("--repetitions", exp.repetitions, "graphs per method")->capture_default_str();
    bench_cmd->add_option("--moral", exp.moral, "auto | exact | estimated")->capture_default_str();
    bench_cmd->add_option("--alpha", exp.alpha, "Fisher-Z significance level")->capture_default_str();
    bench_cmd->add_option("--inner-iters", exp.inner_iters, "override Adam iterations per subproblem");
    bench_cmd->add_option("--soft-iters", exp.soft_iters, "override soft-mode iterations");
    bench_cmd->add_flag("--no-timing", no_timing, "write wall_time as 0 so reruns are byte-identical");

    // inconsistency
    Common inc_c;
    calm::InconsistencyConfig inc;
    auto* inc_cmd = app.add_subcommand("inconsistency", "minimum-l1 DAG over all orders vs the true DAG");
    add_common(inc_cmd, inc_c);
    inc_cmd->add_option("--d", inc.d, "number of nodes (at most 10)")->capture_default_str();
    inc_cmd->add_option("--k", inc.er_k, "expected edges per node")->capture_default_str();
    inc_cmd->add_option("--graphs", inc.n_graphs, "random graphs")->capture_default_str();

    auto* cex_cmd = app.add_subcommand("counterexample", "verify the 3-node counterexample");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim_cmd) {
            sim.seed = sim_c.seed;
            calm::Rng rng = calm::make_rng(sim.seed);
            const calm::SemSpec sem = calm::simulate_sem(sim, rng);
            const fs::path dir = out_dir(sim_c);
            fs::create_directories(dir);
            calm::io::write_matrix(dir / "b_true.csv", sem.b_true);
            calm::io::write_matrix(dir / "omega.csv", calm::Matrix(sem.omega));
            calm::io::write_matrix(dir / "covariance.csv", calm::population_covariance(sem));
            if (sim_n > 0) calm::io::write_matrix(dir / "data.csv", calm::sample_data(sem, sim_n, rng));
            json meta = {{"seed", sim.seed},
                         {"config",
                          {{"d", sim.d}, {"k", sim.er_k}, {"n", sim_n},
                           {"weight_range", {sim.weight_low, sim.weight_high}},
                           {"noise_range", {sim.noise_low, sim.noise_high}}}},
                         {"edges", calm::support(sem.b_true).sum()}};
            write_text(dir / "metadata.json", meta.dump(2) + "\n");
            std::cout << "wrote " << dir.string() << "\n";
        } else if (*mor_cmd) {
            const calm::CovarianceInput ci = load_input(mor_in);
            const calm::Skeleton s = calm::estimate_moral(ci, calm::CiConfig{mor_alpha, std::nullopt});
            const fs::path dir = out_dir(mor_c);
            fs::create_directories(dir);
            calm::io::write_matrix(dir / "moral.csv", s);
            std::cout << "wrote " << (dir / "moral.csv").string() << " (" << s.sum() / 2 << " edges)\n";
        } else if (*lrn_cmd) {
            const calm::CovarianceInput ci = load_input(lrn_in);
            calm::MethodConfig mc = calm::method_preset(method);
            mc.seed = lrn_c.seed;
            if (!objective.empty()) mc.objective = calm::parse_objective(objective);
            if (!relaxation.empty()) mc.relaxation = calm::parse_relaxation(relaxation);
            if (!constraint.empty()) mc.constraint = calm::parse_constraint(constraint);
            if (lambda1) mc.lambda1 = *lambda1;
            if (lambda2) mc.lambda2 = *lambda2;
            if (threshold) mc.threshold = *threshold;
            if (iters > 0) mc.qpm.inner_iters = mc.soft_iters = iters;
            calm::Skeleton moral = moral_file.empty() ? calm::full_skeleton(ci.dim()) : calm::io::read_binary(moral_file);
            if (moral_file.empty() && mc.moral_filter != calm::MoralFilter::none)
                std::cerr << "note: no --moral given, using the full skeleton\n";
            const calm::FitResult fr = calm::fit(ci, moral, mc);
            const fs::path dir = out_dir(lrn_c);
            fs::create_directories(dir);
            calm::io::write_matrix(dir / "b_est.csv", fr.b_est);
            calm::io::write_matrix(dir / "mask_probs.csv", fr.mask_probs);
            json hist = json::array();
            for (const auto& r : fr.history)
                hist.push_back({{"rho", r.rho}, {"loss", r.loss}, {"penalty", r.penalty}, {"h", r.h},
                                {"iterations", r.iterations}});
            json j = {{"method", mc.name},   {"seed", mc.seed},           {"converged", fr.converged},
                      {"wall_time", fr.wall_time}, {"final_loss", fr.final_loss}, {"history", hist}};
            write_text(dir / "history.json", j.dump(2) + "\n");
            std::cout << "wrote " << dir.string() << " (" << calm::support(fr.b_est).sum() << " edges, "
                      << (fr.converged ? "converged" : "not converged") << ")\n";
        } else if (*eval_cmd) {
            const calm::EvalMetrics m =
                calm::evaluate(calm::io::read_binary(est_file), calm::io::read_binary(truth_file));
            std::cout << metrics_json(m).dump(2) << "\n";
        } else if (*bench_cmd) {
            exp.seed = bench_c.seed;
            exp.workers = bench_c.workers;
            exp.standardize = !no_standardize;
            exp.record_timing = !no_timing;
            if (samples == "infinite") {
                exp.sample_mode = calm::SampleMode::infinite;
            } else {
                exp.sample_mode = calm::SampleMode::finite;
                exp.n = std::stol(samples);
            }
            exp.output_dir = out_dir(bench_c);
            const CLI::Option* cfg_opt = app.get_config_ptr();
            const std::string echo = cfg_opt->count() ? slurp(cfg_opt->as<std::string>()) : calm::to_ini(exp);
            const calm::ExperimentResult res = calm::run_experiment(exp);
            calm::write_results(res, exp.output_dir, echo);
            for (const auto& [name, s] : res.summary)
                std::cout << name << ": shd " << s.shd_cpdag.mean << " +- " << s.shd_cpdag.stderr_ << ", precision "
                          << s.precision.mean << ", recall " << s.recall.mean << ", converged " << s.converged << "/"
                          << s.runs << "\n";
            for (const auto& r : res.rows)
                if (!r.error.empty()) std::cerr << r.method << " rep " << r.rep << " failed: " << r.error << "\n";
        } else if (*inc_cmd) {
            inc.seed = inc_c.seed;
            const calm::InconsistencySummary s = calm::run_inconsistency_experiment(inc, inc_c.workers);
            const fs::path dir = out_dir(inc_c);
            fs::create_directories(dir);
            write_text(dir / "inconsistency.csv", calm::records_csv(s));
            json j = {{"d", inc.d},
                      {"k", inc.er_k},
                      {"graphs", inc.n_graphs},
                      {"seed", inc.seed},
                      {"avg_l1_true", s.avg_l1_true},
                      {"avg_l1_min", s.avg_l1_min},
                      {"avg_l0_true", s.avg_l0_true},
                      {"avg_l0_min", s.avg_l0_min},
                      {"avg_shd_cpdag", s.avg_shd_cpdag},
                      {"proportion_smaller_l1", s.proportion_smaller_l1}};
            write_text(dir / "inconsistency_summary.json", j.dump(2) + "\n");
            std::cout << j.dump(2) << "\n";
        } else if (*cex_cmd) {
            const calm::CounterexampleReport rep = calm::verify_counterexample();
            for (const auto& c : rep.checks)
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " [" << c.detail << "]\n";
            return rep.all_pass() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
