#pragma once

#include "calm/types.hpp"

#include <cstdint>
#include <optional>

namespace calm {

/// Ground-truth linear Gaussian SEM, X = B^T X + N with N ~ N(0, diag(omega)).
struct SemSpec {
    WeightedAdjacency b_true;
    Vector omega;  // noise variances
};

struct SimConfig {
    int d = 10;
    double er_k = 1.0;  // expected edge count = er_k * d
    double weight_low = 0.5;
    double weight_high = 2.0;
    double noise_low = 1.0;  // noise ratio = noise_high / noise_low
    double noise_high = 16.0;
    std::uint64_t seed = 0;
};

/// Either an n x d sample matrix or a population covariance.
struct CovarianceInput {
    std::optional<Matrix> samples;
    std::optional<Matrix> population_cov;
    /// Sample size attached to a population covariance, for CI tests that need one.
    std::optional<long> nominal_n;
    bool standardized = false;

    static CovarianceInput from_samples(Matrix x);
    static CovarianceInput from_population(Matrix sigma, std::optional<long> n = std::nullopt);

    Eigen::Index dim() const;
    /// Sample size for testing: rows of the sample matrix, else nominal_n.
    std::optional<long> sample_size() const;
    /// Centered (1/n) X^T X in sample mode, the stored matrix otherwise.
    Matrix covariance() const;
};

/// Random ER DAG: upper triangle of a random node ordering, each slot an edge
/// with probability min(1, 2k/(d-1)).
BinaryAdjacency sample_er_dag(const SimConfig& cfg, Rng& rng);

/// Edge weights uniform on [-high, -low] U [low, high].
WeightedAdjacency assign_weights(const BinaryAdjacency& g, Rng& rng, double low = 0.5, double high = 2.0);

/// Two distinct random nodes get variances `low` and `high`, the rest uniform on [low, high].
Vector assign_noise(int d, Rng& rng, double low = 1.0, double high = 16.0);

/// sample_er_dag + assign_weights + assign_noise.
SemSpec simulate_sem(const SimConfig& cfg, Rng& rng);

/// (I - B)^{-T} diag(omega) (I - B)^{-1}.
Matrix population_covariance(const SemSpec& sem);

/// n ancestral samples in topological order.
Matrix sample_data(const SemSpec& sem, long n, Rng& rng);

/// Sample mode: center and scale columns to unit variance.
/// Population mode: D^{-1/2} Sigma D^{-1/2}.
CovarianceInput standardize(const CovarianceInput& input);

}  // namespace calm
