#include "calm/inconsistency.hpp"

#include "calm/graphs.hpp"
#include "calm/objectives.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace calm {

OrderDag dag_for_order(const Matrix& sigma, const std::vector<int>& order) {
    const auto d = sigma.rows();
    require(sigma.cols() == d && static_cast<Eigen::Index>(order.size()) == d, "dag_for_order: dimension mismatch");
    std::vector<char> seen(d, 0);
    for (int v : order) {
        require(v >= 0 && v < d && !seen[v], "dag_for_order: order is not a permutation");
        seen[v] = 1;
    }
    Matrix permuted(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index c = 0; c < d; ++c) permuted(a, c) = sigma(order[a], order[c]);

    Eigen::LLT<Matrix> llt(permuted);
    if (llt.info() != Eigen::Success) throw DomainError("dag_for_order: covariance is not positive definite");
    const Matrix chol = llt.matrixL();
    const Vector scale = chol.diagonal();
    // unit lower triangular L with permuted = L diag(scale^2) L^T
    const Matrix unit = chol * scale.cwiseInverse().asDiagonal();
    const Matrix unit_inv =
        unit.triangularView<Eigen::UnitLower>().solve(Matrix::Identity(d, d));
    Matrix b_perm = Matrix::Identity(d, d) - unit_inv.transpose();
    b_perm.triangularView<Eigen::Lower>().setZero();

    OrderDag out;
    out.order = order;
    out.b = Matrix::Zero(d, d);
    out.omega.resize(d);
    for (Eigen::Index a = 0; a < d; ++a) {
        out.omega(order[a]) = scale(a) * scale(a);
        for (Eigen::Index c = a + 1; c < d; ++c) out.b(order[a], order[c]) = b_perm(a, c);
    }
    return out;
}

double l1_norm(const WeightedAdjacency& b) {
    return (b.array().abs() >= kStructuralZero).select(b.array().abs(), 0.0).sum();
}

int l0_norm(const WeightedAdjacency& b, double tol) { return static_cast<int>((b.array().abs() >= tol).count()); }

MinL1Result min_l1_over_orders(const Matrix& sigma, const WeightedAdjacency& b_true) {
    const int d = static_cast<int>(sigma.rows());
    if (d > kMaxEnumerationDim)
        throw InvalidArgument("min_l1_over_orders: d = " + std::to_string(d) + " exceeds the enumeration limit of " +
                              std::to_string(kMaxEnumerationDim));
    require(b_true.rows() == d && b_true.cols() == d, "min_l1_over_orders: dimension mismatch");
    const double l1_true = l1_norm(b_true);
    // orders reproducing b_true itself differ from it only by rounding
    const double strict_margin = 1e-9 * (1.0 + l1_true);

    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    MinL1Result out;
    double best = std::numeric_limits<double>::infinity();
    long smaller = 0;
    do {
        OrderDag cand = dag_for_order(sigma, order);
        const double l1 = l1_norm(cand.b);
        if (l1 < l1_true - strict_margin) ++smaller;
        if (l1 < best) {
            best = l1;
            out.best = std::move(cand);
        }
        ++out.orders;
    } while (std::next_permutation(order.begin(), order.end()));
    out.proportion_smaller = static_cast<double>(smaller) / static_cast<double>(out.orders);
    return out;
}

InconsistencyRecord analyze_sem(const SemSpec& sem, int graph_index) {
    const Matrix sigma = population_covariance(sem);
    const MinL1Result res = min_l1_over_orders(sigma, sem.b_true);
    InconsistencyRecord r;
    r.graph = graph_index;
    r.l1_true = l1_norm(sem.b_true);
    r.l1_min = l1_norm(res.best.b);
    r.l0_true = l0_norm(sem.b_true);
    r.l0_min = l0_norm(res.best.b);
    r.shd_cpdag = shd_cpdag(to_cpdag(support(res.best.b, kStructuralZero)), to_cpdag(support(sem.b_true)));
    r.proportion_smaller = res.proportion_smaller;
    return r;
}

InconsistencySummary run_inconsistency_experiment(const InconsistencyConfig& cfg, int workers) {
    require(cfg.d >= 2 && cfg.d <= kMaxEnumerationDim, "inconsistency: d must lie in [2, 10]");
    require(cfg.n_graphs >= 1, "inconsistency: n_graphs must be positive");
    InconsistencySummary out;
    out.records.resize(cfg.n_graphs);

    std::atomic<int> next{0};
    auto work = [&] {
        for (int g = next++; g < cfg.n_graphs; g = next++) {
            Rng rng = make_rng(seed_stream(cfg.seed, static_cast<std::uint64_t>(g)));
            SimConfig sc;
            sc.d = cfg.d;
            sc.er_k = cfg.er_k;
            sc.noise_low = cfg.noise_low;
            sc.noise_high = cfg.noise_high;
            out.records[g] = analyze_sem(simulate_sem(sc, rng), g);
        }
    };
    const int n_threads = std::max(1, std::min(workers, cfg.n_graphs));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    const double n = cfg.n_graphs;
    for (const auto& r : out.records) {
        out.avg_l1_true += r.l1_true / n;
        out.avg_l1_min += r.l1_min / n;
        out.avg_l0_true += r.l0_true / n;
        out.avg_l0_min += r.l0_min / n;
        out.avg_shd_cpdag += r.shd_cpdag / n;
        out.proportion_smaller_l1 += r.proportion_smaller / n;
    }
    return out;
}

bool CounterexampleReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
}

SemSpec counterexample_true() {
    SemSpec s;
    s.b_true = Matrix::Zero(3, 3);
    s.b_true(0, 1) = 0.5;
    s.b_true(2, 1) = -1.0;
    s.omega = Vector(3);
    s.omega << 16.0, 4.0, 1.0;
    return s;
}

SemSpec counterexample_alternative() {
    SemSpec s;
    s.b_true = Matrix::Zero(3, 3);
    s.b_true(0, 1) = 0.5;
    s.b_true(0, 2) = 0.1;
    s.b_true(1, 2) = -0.2;
    s.omega = Vector(3);
    s.omega << 16.0, 5.0, 0.8;
    return s;
}

Matrix counterexample_covariance() {
    Matrix s(3, 3);
    s << 16, 8, 0, 8, 9, -1, 0, -1, 1;
    return s;
}

CounterexampleReport verify_counterexample() {
    CounterexampleReport rep;
    auto add = [&](std::string name, bool pass, auto value) {
        std::ostringstream os;
        os.precision(17);
        os << value;
        rep.checks.push_back({std::move(name), pass, os.str()});
    };
    const SemSpec t = counterexample_true();
    const SemSpec a = counterexample_alternative();
    const Matrix sigma = counterexample_covariance();

    const double err_t = (population_covariance(t) - sigma).cwiseAbs().maxCoeff();
    const double err_a = (population_covariance(a) - sigma).cwiseAbs().maxCoeff();
    add("true SEM reproduces covariance (max abs err < 1e-12)", err_t < 1e-12, err_t);
    add("alternative SEM reproduces covariance (max abs err < 1e-12)", err_a < 1e-12, err_a);
    add("l0 of true DAG = 2", l0_norm(t.b_true) == 2, l0_norm(t.b_true));
    add("l0 of alternative DAG = 3", l0_norm(a.b_true) == 3, l0_norm(a.b_true));
    add("l1 of true DAG = 1.5", std::abs(l1_norm(t.b_true) - 1.5) < 1e-12, l1_norm(t.b_true));
    add("l1 of alternative DAG = 0.8", std::abs(l1_norm(a.b_true) - 0.8) < 1e-12, l1_norm(a.b_true));
    const int shd = shd_cpdag(to_cpdag(support(t.b_true)), to_cpdag(support(a.b_true)));
    add("SHD between CPDAGs > 0", shd > 0, shd);
    const double lt = golem_nv_loss(t.b_true, sigma).value;
    const double la = golem_nv_loss(a.b_true, sigma).value;
    add("equal profiled likelihood (|diff| < 1e-10)", std::abs(lt - la) < 1e-10, std::abs(lt - la));
    return rep;
}

std::string records_csv(const InconsistencySummary& s) {
    std::ostringstream csv;
    csv << "graph,l1_true,l1_min,l0_true,l0_min,shd_cpdag,proportion_smaller\n";
    csv.precision(17);
    for (const auto& r : s.records)
        csv << r.graph << ',' << r.l1_true << ',' << r.l1_min << ',' << r.l0_true << ',' << r.l0_min << ','
            << r.shd_cpdag << ',' << r.proportion_smaller << '\n';
    return csv.str();
}

}  // namespace calm
