#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace calm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Binary adjacency: entry (i, j) == 1 means edge i -> j (row = parent, column = child).
using BinaryAdjacency = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
// Symmetric 0/1 matrix with zero diagonal.
using Skeleton = BinaryAdjacency;
// Real edge weights, same orientation as BinaryAdjacency.
using WeightedAdjacency = Matrix;

/// Raised when an input lies outside the domain of a function
/// (singular I - B, negative mask entries, nonpositive variances, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised for malformed arguments: dimension mismatch, cyclic input where a DAG is required.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent seeds from (master, index) pairs.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic sub-seed for stream `index` under `master`.
/// Injective in each argument with the other fixed: every step is a bijection on uint64.
constexpr std::uint64_t seed_stream(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

}  // namespace calm
