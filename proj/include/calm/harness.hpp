#pragma once

#include "calm/graphs.hpp"
#include "calm/learners.hpp"
#include "calm/moral.hpp"
#include "calm/simulate.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace calm {

enum class SampleMode { finite, infinite };

struct ExperimentConfig {
    int d = 20;
    double er_k = 1.0;
    SampleMode sample_mode = SampleMode::infinite;
    long n = 1000;  // finite mode only
    bool standardize = true;
    std::vector<std::string> methods{"calm"};
    int repetitions = 10;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "results";
    /// "auto": exact moral graph for infinite samples, IAMB estimate for finite samples.
    std::string moral = "auto";
    double alpha = 0.05;
    int workers = 1;
    bool record_timing = true;
    /// Overrides of the preset iteration counts; 0 keeps the preset.
    long inner_iters = 0;
    long soft_iters = 0;

    void validate() const;
};

struct ResultRow {
    std::string method;
    int rep = 0;
    int shd_cpdag = 0;
    double precision = 0.0;
    double recall = 0.0;
    double wall_time = 0.0;
    bool converged = false;
    /// Empty on success; failed fits keep their row with shd_cpdag = -1.
    std::string error;

    bool operator==(const ResultRow&) const = default;
};

struct MetricSummary {
    double mean = 0.0;
    double stderr_ = 0.0;
};

struct MethodSummary {
    MetricSummary shd_cpdag, precision, recall, wall_time;
    int runs = 0;
    int failures = 0;
    int converged = 0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;  // ordered by (rep, method position)
    std::map<std::string, MethodSummary> summary;
    std::vector<int> realized_edges;  // per repetition
};

/// mean and sample-std / sqrt(count); stderr is 0 for fewer than two values.
MetricSummary mean_stderr(const std::vector<double>& values);

std::map<std::string, MethodSummary> summarize(const std::vector<ResultRow>& rows);

/// Problem instance of one repetition: the SEM and the fitting input derived from it.
struct Instance {
    SemSpec sem;
    CovarianceInput input;
    Skeleton moral_exact;
};

Instance make_instance(const ExperimentConfig& cfg, int rep);

/// Resolved method configuration for a repetition (seed and iteration overrides applied).
MethodConfig method_for(const ExperimentConfig& cfg, const std::string& method, int rep);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Key = value text with sections; what `bench --config` reads.
std::string to_ini(const ExperimentConfig& cfg);

/// results.csv, summary.json and config.ini under `dir`. `config_text` is echoed verbatim.
void write_results(const ExperimentResult& result, const std::filesystem::path& dir, const std::string& config_text);

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

}  // namespace calm
