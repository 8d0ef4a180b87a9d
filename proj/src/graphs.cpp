#include "calm/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace calm {

namespace {

void require_square(const BinaryAdjacency& a, const char* what) {
    require(a.rows() == a.cols(), std::string(what) + ": matrix must be square");
}

bool adjacent(const BinaryAdjacency& g, Eigen::Index i, Eigen::Index j) {
    return g(i, j) != 0 || g(j, i) != 0;
}

bool directed(const BinaryAdjacency& g, Eigen::Index i, Eigen::Index j) {
    return g(i, j) != 0 && g(j, i) == 0;
}

bool undirected(const BinaryAdjacency& g, Eigen::Index i, Eigen::Index j) {
    return g(i, j) != 0 && g(j, i) != 0;
}

void orient(BinaryAdjacency& g, Eigen::Index from, Eigen::Index to) { g(to, from) = 0; }

// Meek rules 1-4; returns true if any edge was oriented.
bool meek_pass(BinaryAdjacency& g) {
    const Eigen::Index d = g.rows();
    bool changed = false;
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
            if (a == b || !undirected(g, a, b)) continue;
            bool go = false;
            // R1: c -> a - b, c not adjacent to b.
            for (Eigen::Index c = 0; c < d && !go; ++c)
                go = c != b && directed(g, c, a) && !adjacent(g, c, b);
            // R2: a -> c -> b.
            for (Eigen::Index c = 0; c < d && !go; ++c)
                go = directed(g, a, c) && directed(g, c, b);
            // R3: a - c -> b, a - e -> b, c and e nonadjacent.
            for (Eigen::Index c = 0; c < d && !go; ++c) {
                if (!undirected(g, a, c) || !directed(g, c, b)) continue;
                for (Eigen::Index e = c + 1; e < d && !go; ++e)
                    go = undirected(g, a, e) && directed(g, e, b) && !adjacent(g, c, e);
            }
            // R4: a - c -> e -> b, c and b nonadjacent, a adjacent to e.
            for (Eigen::Index c = 0; c < d && !go; ++c) {
                if (c == b || !undirected(g, a, c) || adjacent(g, c, b)) continue;
                for (Eigen::Index e = 0; e < d && !go; ++e)
                    go = directed(g, c, e) && directed(g, e, b) && adjacent(g, a, e);
            }
            if (go) {
                orient(g, a, b);
                changed = true;
            }
        }
    }
    return changed;
}

}  // namespace

BinaryAdjacency support(const WeightedAdjacency& w, double tol) {
    BinaryAdjacency a = (w.array().abs() > tol).cast<int>();
    a.diagonal().setZero();
    return a;
}

namespace {

// Kahn's algorithm; the result is shorter than d iff `a` has a cycle.
std::vector<int> kahn(const BinaryAdjacency& a) {
    require_square(a, "topological_order");
    const int d = static_cast<int>(a.rows());
    std::vector<int> indeg(d, 0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (a(i, j) != 0) ++indeg[j];
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (int j = 0; j < d; ++j)
        if (indeg[j] == 0) ready.push(j);
    std::vector<int> order;
    order.reserve(d);
    while (!ready.empty()) {
        const int i = ready.top();
        ready.pop();
        order.push_back(i);
        for (int j = 0; j < d; ++j)
            if (a(i, j) != 0 && --indeg[j] == 0) ready.push(j);
    }
    return order;
}

}  // namespace

std::vector<int> topological_order(const BinaryAdjacency& a) {
    std::vector<int> order = kahn(a);
    require(static_cast<Eigen::Index>(order.size()) == a.rows(), "topological_order: graph has a directed cycle");
    return order;
}

bool is_acyclic(const BinaryAdjacency& a) { return static_cast<Eigen::Index>(kahn(a).size()) == a.rows(); }

Skeleton skeleton_of(const BinaryAdjacency& a) {
    require_square(a, "skeleton_of");
    Skeleton s = ((a.array() != 0) || (a.transpose().array() != 0)).cast<int>();
    s.diagonal().setZero();
    return s;
}

Skeleton moralize(const BinaryAdjacency& dag) {
    require(is_acyclic(dag), "moralize: input graph has a directed cycle");
    Skeleton m = skeleton_of(dag);
    const Eigen::Index d = dag.rows();
    for (Eigen::Index child = 0; child < d; ++child)
        for (Eigen::Index p = 0; p < d; ++p) {
            if (dag(p, child) == 0) continue;
            for (Eigen::Index q = p + 1; q < d; ++q)
                if (dag(q, child) != 0) m(p, q) = m(q, p) = 1;
        }
    m.diagonal().setZero();
    return m;
}

std::vector<VStructure> v_structures(const BinaryAdjacency& dag) {
    const int d = static_cast<int>(dag.rows());
    std::vector<VStructure> out;
    for (int c = 0; c < d; ++c)
        for (int a = 0; a < d; ++a) {
            if (a == c || dag(a, c) == 0) continue;
            for (int b = a + 1; b < d; ++b)
                if (b != c && dag(b, c) != 0 && dag(a, b) == 0 && dag(b, a) == 0)
                    out.push_back({a, c, b});
        }
    std::sort(out.begin(), out.end());
    return out;
}

Cpdag to_cpdag(const BinaryAdjacency& dag) {
    require(is_acyclic(dag), "to_cpdag: input graph has a directed cycle");
    BinaryAdjacency g = skeleton_of(dag);
    for (const auto& v : v_structures(dag)) {
        orient(g, v.a, v.collider);
        orient(g, v.b, v.collider);
    }
    while (meek_pass(g)) {
    }
    return Cpdag(std::move(g));
}

int shd_cpdag(const Cpdag& a, const Cpdag& b) {
    require(a.size() == b.size(), "shd_cpdag: dimension mismatch");
    int count = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = i + 1; j < a.size(); ++j)
            if (a.mark(i, j) != b.mark(i, j)) ++count;
    return count;
}

EvalMetrics skeleton_metrics(const Skeleton& est, const Skeleton& truth) {
    require(est.rows() == truth.rows() && est.cols() == truth.cols(),
            "skeleton_metrics: dimension mismatch");
    long n_est = 0, n_true = 0, n_both = 0;
    for (Eigen::Index i = 0; i < est.rows(); ++i)
        for (Eigen::Index j = i + 1; j < est.cols(); ++j) {
            const bool e = est(i, j) != 0 || est(j, i) != 0;
            const bool t = truth(i, j) != 0 || truth(j, i) != 0;
            n_est += e;
            n_true += t;
            n_both += e && t;
        }
    EvalMetrics m;
    m.skeleton_precision = n_est == 0 ? 1.0 : static_cast<double>(n_both) / n_est;
    m.skeleton_recall = n_true == 0 ? 1.0 : static_cast<double>(n_both) / n_true;
    return m;
}

EvalMetrics evaluate(const BinaryAdjacency& est, const BinaryAdjacency& truth) {
    EvalMetrics m = skeleton_metrics(skeleton_of(est), skeleton_of(truth));
    m.shd_cpdag = shd_cpdag(to_cpdag(est), to_cpdag(truth));
    return m;
}

BinaryAdjacency threshold_mask(const Matrix& probs, const BinaryAdjacency& filter, double cut) {
    require(cut > 0.0 && cut < 1.0, "threshold_mask: cut must lie in (0, 1)");
    require(probs.rows() == filter.rows() && probs.cols() == filter.cols(),
            "threshold_mask: dimension mismatch");
    BinaryAdjacency a = ((probs.array() * filter.cast<double>().array()) > cut).cast<int>();
    a.diagonal().setZero();
    return a;
}

WeightedAdjacency postprocess_to_dag(const WeightedAdjacency& w) {
    WeightedAdjacency out = w;
    out.diagonal().setZero();
    const Eigen::Index d = out.rows();
    while (true) {
        const BinaryAdjacency a = support(out);
        if (is_acyclic(a)) return out;
        // reach(i, j): j reachable from i by a nonempty path.
        BinaryAdjacency reach = a;
        for (Eigen::Index k = 0; k < d; ++k)
            for (Eigen::Index i = 0; i < d; ++i)
                if (reach(i, k) != 0)
                    for (Eigen::Index j = 0; j < d; ++j)
                        if (reach(k, j) != 0) reach(i, j) = 1;
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index bi = -1, bj = -1;
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                if (a(i, j) != 0 && reach(j, i) != 0 && std::abs(out(i, j)) < best) {
                    best = std::abs(out(i, j));
                    bi = i;
                    bj = j;
                }
        out(bi, bj) = 0.0;
    }
}

}  // namespace calm
