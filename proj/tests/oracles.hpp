#pragma once

// Reference implementations used only by tests. They are deliberately naive
// and share no code with the library.

#include "calm/types.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <tuple>
#include <vector>

namespace oracle {

using calm::BinaryAdjacency;
using calm::Matrix;

inline bool dfs_acyclic(const BinaryAdjacency& a) {
    const int d = static_cast<int>(a.rows());
    std::vector<int> color(d, 0);
    std::function<bool(int)> visit = [&](int u) {
        color[u] = 1;
        for (int v = 0; v < d; ++v) {
            if (!a(u, v) || u == v) continue;
            if (color[v] == 1) return false;
            if (color[v] == 0 && !visit(v)) return false;
        }
        color[u] = 2;
        return true;
    };
    for (int u = 0; u < d; ++u)
        if (a(u, u) || (color[u] == 0 && !visit(u))) return false;
    return true;
}

inline BinaryAdjacency random_binary(int d, double p, calm::Rng& rng, bool zero_diag = true) {
    std::bernoulli_distribution coin(p);
    BinaryAdjacency a = BinaryAdjacency::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (!(zero_diag && i == j)) a(i, j) = coin(rng);
    return a;
}

/// Random DAG: random order, each forward pair an edge with probability p.
inline BinaryAdjacency random_dag(int d, double p, calm::Rng& rng) {
    std::vector<int> perm(d);
    for (int i = 0; i < d; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::bernoulli_distribution coin(p);
    BinaryAdjacency a = BinaryAdjacency::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (coin(rng)) a(perm[i], perm[j]) = 1;
    return a;
}

inline std::set<std::pair<int, int>> skeleton_pairs(const BinaryAdjacency& a) {
    std::set<std::pair<int, int>> s;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (i != j && (a(i, j) || a(j, i))) s.insert({std::min(i, j), std::max(i, j)});
    return s;
}

inline std::set<std::tuple<int, int, int>> colliders(const BinaryAdjacency& a) {
    std::set<std::tuple<int, int, int>> out;
    const int d = static_cast<int>(a.rows());
    for (int c = 0; c < d; ++c)
        for (int x = 0; x < d; ++x)
            for (int y = x + 1; y < d; ++y)
                if (a(x, c) && a(y, c) && !a(x, y) && !a(y, x)) out.insert({x, c, y});
    return out;
}

inline bool markov_equivalent(const BinaryAdjacency& a, const BinaryAdjacency& b) {
    return skeleton_pairs(a) == skeleton_pairs(b) && colliders(a) == colliders(b);
}

/// Essential graph by brute force: enumerate every acyclic orientation of the skeleton,
/// keep those Markov equivalent to `dag`, and mark an edge directed iff all members agree.
inline BinaryAdjacency brute_force_cpdag(const BinaryAdjacency& dag) {
    const auto skel = skeleton_pairs(dag);
    const std::vector<std::pair<int, int>> pairs(skel.begin(), skel.end());
    const int d = static_cast<int>(dag.rows());
    const std::size_t m = pairs.size();
    BinaryAdjacency seen_fwd = BinaryAdjacency::Zero(d, d);
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
        BinaryAdjacency g = BinaryAdjacency::Zero(d, d);
        for (std::size_t e = 0; e < m; ++e) {
            auto [i, j] = pairs[e];
            if (mask >> e & 1) g(i, j) = 1;
            else g(j, i) = 1;
        }
        if (!dfs_acyclic(g) || !markov_equivalent(g, dag)) continue;
        seen_fwd = seen_fwd.cwiseMax(g);
    }
    return seen_fwd;
}

/// Regression of each variable on its predecessors in `order`, using the normal equations on sigma.
inline std::pair<Matrix, calm::Vector> sequential_regression(const Matrix& sigma, const std::vector<int>& order) {
    const int d = static_cast<int>(sigma.rows());
    Matrix b = Matrix::Zero(d, d);
    calm::Vector omega(d);
    for (int k = 0; k < d; ++k) {
        const int y = order[k];
        if (k == 0) {
            omega(y) = sigma(y, y);
            continue;
        }
        Matrix sxx(k, k);
        calm::Vector sxy(k);
        for (int r = 0; r < k; ++r) {
            sxy(r) = sigma(order[r], y);
            for (int c = 0; c < k; ++c) sxx(r, c) = sigma(order[r], order[c]);
        }
        const calm::Vector beta = sxx.fullPivLu().solve(sxy);
        for (int r = 0; r < k; ++r) b(order[r], y) = beta(r);
        omega(y) = sigma(y, y) - sxy.dot(beta);
    }
    return {b, omega};
}

/// Central finite-difference gradient of a scalar function of a matrix.
inline Matrix fd_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x, double step = 1e-6) {
    Matrix g(x.rows(), x.cols());
    Matrix xp = x;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double orig = xp(i, j);
            xp(i, j) = orig + step;
            const double fp = f(xp);
            xp(i, j) = orig - step;
            const double fm = f(xp);
            xp(i, j) = orig;
            g(i, j) = (fp - fm) / (2.0 * step);
        }
    return g;
}

/// ||a - b|| / max(||a||, ||b||), with 0/0 read as 0.
inline double relative_error(const Matrix& a, const Matrix& b) {
    const double scale = std::max(a.norm(), b.norm());
    if (scale == 0.0) return 0.0;
    return (a - b).norm() / scale;
}

inline Matrix random_spd(int d, calm::Rng& rng) {
    std::normal_distribution<double> z;
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = z(rng);
    Matrix s = a * a.transpose() / d;
    s.diagonal().array() += 0.5;
    return s;
}

}  // namespace oracle
