#pragma once

#include "calm/types.hpp"

#include <vector>

namespace calm {

enum class EdgeMark { absent, forward, backward, undirected };

/// Completed partially directed acyclic graph.
///
/// Stored as a 0/1 matrix: g(i,j) = g(j,i) = 1 is an undirected edge i - j,
/// g(i,j) = 1 with g(j,i) = 0 is a directed edge i -> j.
class Cpdag {
public:
    Cpdag() = default;
    explicit Cpdag(BinaryAdjacency g) : g_(std::move(g)) {}

    Eigen::Index size() const { return g_.rows(); }
    const BinaryAdjacency& matrix() const { return g_; }

    /// Mark of the unordered pair {i, j}, seen from i: forward means i -> j.
    EdgeMark mark(Eigen::Index i, Eigen::Index j) const {
        const bool ij = g_(i, j) != 0;
        const bool ji = g_(j, i) != 0;
        if (ij && ji) return EdgeMark::undirected;
        if (ij) return EdgeMark::forward;
        if (ji) return EdgeMark::backward;
        return EdgeMark::absent;
    }

    bool operator==(const Cpdag& other) const { return g_ == other.g_; }

private:
    BinaryAdjacency g_;
};

struct EvalMetrics {
    int shd_cpdag = 0;
    double skeleton_precision = 1.0;
    double skeleton_recall = 1.0;
};

/// Support of a weighted matrix: 1 where |w| > tol, diagonal forced to 0.
BinaryAdjacency support(const WeightedAdjacency& w, double tol = 0.0);

/// Kahn topological check.
bool is_acyclic(const BinaryAdjacency& a);

/// A topological order of an acyclic graph (smallest ready index first).
std::vector<int> topological_order(const BinaryAdjacency& a);

/// Undirected version of `a`, symmetric, zero diagonal.
Skeleton skeleton_of(const BinaryAdjacency& a);

/// Moral graph: skeleton plus an edge between every pair of co-parents.
Skeleton moralize(const BinaryAdjacency& dag);

/// CPDAG of the Markov equivalence class of `dag`: v-structures oriented,
/// then Meek rules 1-4 applied to a fixpoint.
Cpdag to_cpdag(const BinaryAdjacency& dag);

/// Unshielded colliders (a, c, b) with a < b, a -> c <- b, a and b nonadjacent.
struct VStructure {
    int a, collider, b;
    auto operator<=>(const VStructure&) const = default;
};
std::vector<VStructure> v_structures(const BinaryAdjacency& dag);

/// Number of unordered pairs whose marks differ.
int shd_cpdag(const Cpdag& a, const Cpdag& b);

/// Precision and recall of the undirected edges of `est` against `truth`.
/// Empty denominators give 1.0.
EvalMetrics skeleton_metrics(const Skeleton& est, const Skeleton& truth);

/// Full evaluation of an estimated DAG against the true DAG.
EvalMetrics evaluate(const BinaryAdjacency& est, const BinaryAdjacency& truth);

/// Entry 1 iff probs(i,j) * filter(i,j) > cut; diagonal zeroed.
BinaryAdjacency threshold_mask(const Matrix& probs, const BinaryAdjacency& filter, double cut);

/// Repeatedly zero the smallest-|weight| entry lying on a directed cycle until acyclic.
/// Ties go to the first entry in row-major order.
WeightedAdjacency postprocess_to_dag(const WeightedAdjacency& w);

}  // namespace calm
