#pragma once

// Covariance-equivalent DAGs from ordered LDL^T factorizations, and the
// experiment comparing minimum-l1 DAGs with the generating DAG.

#include "calm/simulate.hpp"
#include "calm/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace calm {

/// Entries with magnitude below this count as structural zeros.
inline constexpr double kStructuralZero = 1e-9;
inline constexpr int kMaxEnumerationDim = 10;

struct OrderDag {
    std::vector<int> order;
    WeightedAdjacency b;
    Vector omega;
};

/// The unique DAG consistent with `order` that reproduces `sigma`:
/// factor P sigma P^T = L D L^T, B_pi = I - L^{-T}, omega = diag(D), then relabel.
OrderDag dag_for_order(const Matrix& sigma, const std::vector<int>& order);

double l1_norm(const WeightedAdjacency& b);
int l0_norm(const WeightedAdjacency& b, double tol = kStructuralZero);

struct MinL1Result {
    OrderDag best;
    double proportion_smaller = 0.0;  // fraction of orders with |B|_1 < |b_true|_1
    long orders = 0;
};

/// Exhaustive search over all d! orders (lexicographic; first minimum wins).
MinL1Result min_l1_over_orders(const Matrix& sigma, const WeightedAdjacency& b_true);

struct InconsistencyConfig {
    int d = 8;
    double er_k = 1.0;
    int n_graphs = 1000;
    std::uint64_t seed = 0;
    double noise_low = 1.0;
    double noise_high = 16.0;
};

struct InconsistencyRecord {
    int graph = 0;
    double l1_true = 0.0;
    double l1_min = 0.0;
    int l0_true = 0;
    int l0_min = 0;
    int shd_cpdag = 0;
    double proportion_smaller = 0.0;
};

struct InconsistencySummary {
    double avg_l1_true = 0.0;
    double avg_l1_min = 0.0;
    double avg_l0_true = 0.0;
    double avg_l0_min = 0.0;
    double avg_shd_cpdag = 0.0;
    double proportion_smaller_l1 = 0.0;
    std::vector<InconsistencyRecord> records;
};

InconsistencyRecord analyze_sem(const SemSpec& sem, int graph_index = 0);

InconsistencySummary run_inconsistency_experiment(const InconsistencyConfig& cfg, int workers = 1);

/// One line per graph, header graph,l1_true,l1_min,l0_true,l0_min,shd_cpdag,proportion_smaller.
std::string records_csv(const InconsistencySummary& s);

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CounterexampleReport {
    std::vector<CheckLine> checks;
    bool all_pass() const;
};

/// The 3-node pair: B* = {1->2: 1/2, 3->2: -1}, Omega* = diag(16, 4, 1) and
/// B~ = {1->2: 1/2, 1->3: 1/10, 2->3: -1/5}, Omega~ = diag(16, 5, 4/5).
SemSpec counterexample_true();
SemSpec counterexample_alternative();
Matrix counterexample_covariance();

CounterexampleReport verify_counterexample();

}  // namespace calm
