#include "calm/harness.hpp"

#include <json.hpp>

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace calm {

namespace {

// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t name_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

void ExperimentConfig::validate() const {
    require(d >= 2, "experiment: d must be at least 2");
    require(er_k >= 1.0, "experiment: er_k must be at least 1");
    require(repetitions >= 1, "experiment: repetitions must be positive");
    require(sample_mode == SampleMode::infinite || n >= d, "experiment: finite mode needs n >= d");
    require(!methods.empty(), "experiment: no methods given");
    require(moral == "auto" || moral == "exact" || moral == "estimated", "experiment: moral must be auto|exact|estimated");
    require(workers >= 1, "experiment: workers must be positive");
    for (const auto& m : methods) method_preset(m);
}

MetricSummary mean_stderr(const std::vector<double>& values) {
    MetricSummary s;
    if (values.empty()) {
        s.mean = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    const double n = static_cast<double>(values.size());
    for (double v : values) s.mean += v;
    s.mean /= n;
    if (values.size() < 2) return s;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    return s;
}

std::map<std::string, MethodSummary> summarize(const std::vector<ResultRow>& rows) {
    std::map<std::string, std::vector<const ResultRow*>> by_method;
    for (const auto& r : rows) by_method[r.method].push_back(&r);
    std::map<std::string, MethodSummary> out;
    for (const auto& [name, list] : by_method) {
        MethodSummary ms;
        std::vector<double> shd, prec, rec, wall;
        for (const ResultRow* r : list) {
            ++ms.runs;
            if (!r->error.empty()) {
                ++ms.failures;
                continue;
            }
            ms.converged += r->converged;
            shd.push_back(r->shd_cpdag);
            prec.push_back(r->precision);
            rec.push_back(r->recall);
            wall.push_back(r->wall_time);
        }
        ms.shd_cpdag = mean_stderr(shd);
        ms.precision = mean_stderr(prec);
        ms.recall = mean_stderr(rec);
        ms.wall_time = mean_stderr(wall);
        out[name] = ms;
    }
    return out;
}

Instance make_instance(const ExperimentConfig& cfg, int rep) {
    Rng rng = make_rng(seed_stream(cfg.seed, static_cast<std::uint64_t>(rep)));
    SimConfig sc;
    sc.d = cfg.d;
    sc.er_k = cfg.er_k;
    Instance inst;
    inst.sem = simulate_sem(sc, rng);
    if (cfg.sample_mode == SampleMode::infinite) {
        inst.input = CovarianceInput::from_population(population_covariance(inst.sem));
    } else {
        inst.input = CovarianceInput::from_samples(sample_data(inst.sem, cfg.n, rng));
    }
    if (cfg.standardize) inst.input = standardize(inst.input);
    inst.moral_exact = moralize(support(inst.sem.b_true));
    return inst;
}

MethodConfig method_for(const ExperimentConfig& cfg, const std::string& method, int rep) {
    MethodConfig mc = method_preset(method);
    mc.seed = seed_stream(seed_stream(cfg.seed, static_cast<std::uint64_t>(rep)), name_hash(method));
    if (cfg.inner_iters > 0) mc.qpm.inner_iters = cfg.inner_iters;
    if (cfg.soft_iters > 0) mc.soft_iters = cfg.soft_iters;
    if (mc.moral_filter != MoralFilter::none) {
        if (cfg.moral == "exact") mc.moral_filter = MoralFilter::exact;
        else if (cfg.moral == "estimated") mc.moral_filter = MoralFilter::estimated;
        else mc.moral_filter = cfg.sample_mode == SampleMode::infinite ? MoralFilter::exact : MoralFilter::estimated;
    }
    return mc;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const int n_methods = static_cast<int>(cfg.methods.size());
    ExperimentResult out;
    out.rows.resize(static_cast<std::size_t>(cfg.repetitions) * n_methods);
    out.realized_edges.resize(cfg.repetitions);

    std::atomic<int> next{0};
    auto work = [&] {
        for (int rep = next++; rep < cfg.repetitions; rep = next++) {
            const Instance inst = make_instance(cfg, rep);
            out.realized_edges[rep] = static_cast<int>(support(inst.sem.b_true).sum());
            const BinaryAdjacency truth = support(inst.sem.b_true);
            std::optional<Skeleton> estimated;
            for (int k = 0; k < n_methods; ++k) {
                ResultRow& row = out.rows[static_cast<std::size_t>(rep) * n_methods + k];
                row.method = cfg.methods[k];
                row.rep = rep;
                try {
                    const MethodConfig mc = method_for(cfg, row.method, rep);
                    Skeleton moral;
                    switch (mc.moral_filter) {
                        case MoralFilter::none: moral = full_skeleton(cfg.d); break;
                        case MoralFilter::exact: moral = inst.moral_exact; break;
                        case MoralFilter::estimated:
                            if (!estimated) estimated = estimate_moral(inst.input, CiConfig{cfg.alpha, std::nullopt});
                            moral = *estimated;
                            break;
                    }
                    const FitResult fr = fit(inst.input, moral, mc);
                    const EvalMetrics m = evaluate(support(fr.b_est), truth);
                    row.shd_cpdag = m.shd_cpdag;
                    row.precision = m.skeleton_precision;
                    row.recall = m.skeleton_recall;
                    row.wall_time = cfg.record_timing ? fr.wall_time : 0.0;
                    row.converged = fr.converged;
                } catch (const std::exception& e) {
                    row.shd_cpdag = -1;
                    row.precision = row.recall = std::numeric_limits<double>::quiet_NaN();
                    row.converged = false;
                    row.error = e.what();
                }
            }
        }
    };
    const int n_threads = std::max(1, std::min(cfg.workers, cfg.repetitions));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    out.summary = summarize(out.rows);
    return out;
}

std::string to_ini(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "[bench]\n";
    os << "d = " << cfg.d << "\n";
    os << "k = " << fmt_double(cfg.er_k) << "\n";
    os << "samples = " << (cfg.sample_mode == SampleMode::infinite ? std::string("infinite") : std::to_string(cfg.n))
       << "\n";
    os << "standardize = " << (cfg.standardize ? "true" : "false") << "\n";
    os << "methods = ";
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) os << (i ? "," : "") << cfg.methods[i];
    os << "\n";
    os << "repetitions = " << cfg.repetitions << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "moral = " << cfg.moral << "\n";
    os << "alpha = " << fmt_double(cfg.alpha) << "\n";
    os << "workers = " << cfg.workers << "\n";
    if (cfg.inner_iters > 0) os << "inner-iters = " << cfg.inner_iters << "\n";
    if (cfg.soft_iters > 0) os << "soft-iters = " << cfg.soft_iters << "\n";
    os << "timing = " << (cfg.record_timing ? "true" : "false") << "\n";
    return os.str();
}

void write_results(const ExperimentResult& result, const std::filesystem::path& dir, const std::string& config_text) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());

    auto open = [&](const char* name) {
        std::ofstream os(dir / name, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open for writing: " + (dir / name).string());
        return os;
    };

    {
        auto os = open("results.csv");
        os << "method,rep,shd_cpdag,precision,recall,wall_time,converged\n";
        for (const auto& r : result.rows)
            os << r.method << ',' << r.rep << ',' << r.shd_cpdag << ',' << fmt_double(r.precision) << ','
               << fmt_double(r.recall) << ',' << fmt_double(r.wall_time) << ',' << (r.converged ? 1 : 0) << '\n';
        if (!os) throw std::runtime_error("write failed: " + (dir / "results.csv").string());
    }
    {
        nlohmann::ordered_json j;
        for (const auto& [name, s] : result.summary) {
            auto metric = [](const MetricSummary& m) {
                return nlohmann::ordered_json{{"mean", m.mean}, {"stderr", m.stderr_}};
            };
            j[name] = {{"shd_cpdag", metric(s.shd_cpdag)},
                       {"precision", metric(s.precision)},
                       {"recall", metric(s.recall)},
                       {"wall_time", metric(s.wall_time)},
                       {"runs", s.runs},
                       {"failures", s.failures},
                       {"converged", s.converged}};
        }
        auto os = open("summary.json");
        os << j.dump(2) << '\n';
        if (!os) throw std::runtime_error("write failed: " + (dir / "summary.json").string());
    }
    {
        auto os = open("config.ini");
        os << config_text;
        if (!os) throw std::runtime_error("write failed: " + (dir / "config.ini").string());
    }
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != "method,rep,shd_cpdag,precision,recall,wall_time,converged")
        throw std::runtime_error(path.string() + ": unexpected header");
    std::vector<ResultRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 7) throw std::runtime_error(path.string() + ": malformed row: " + line);
        ResultRow r;
        r.method = cells[0];
        r.rep = std::stoi(cells[1]);
        r.shd_cpdag = std::stoi(cells[2]);
        auto to_d = [&](const std::string& s) {
            double v = 0.0;
            auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc()) throw std::runtime_error(path.string() + ": bad number '" + s + "'");
            return v;
        };
        r.precision = to_d(cells[3]);
        r.recall = to_d(cells[4]);
        r.wall_time = to_d(cells[5]);
        r.converged = cells[6] == "1";
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace calm
