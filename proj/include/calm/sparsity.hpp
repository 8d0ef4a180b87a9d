#pragma once

// Differentiable surrogates for the l0 penalty on edge masks.

#include "calm/types.hpp"

#include <cmath>
#include <string>

namespace calm {

enum class RelaxationKind { gumbel, stg, tanh, l1_direct };

RelaxationKind parse_relaxation(const std::string& name);
std::string to_string(RelaxationKind kind);

struct PenaltyValue {
    double value = 0.0;
    Matrix grad;
};

/// Gumbel-Softmax (binary concrete) edge mask, mask = sigmoid((U + G) / tau).
struct GumbelMask {
    Matrix logits;
    double temperature = 0.5;
    Matrix weights;  // edge weights P; the learned B is filter o mask o P
};

inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// Standard logistic noise, log(u) - log(1 - u), drawn entrywise.
Matrix logistic_noise(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// sigmoid((U + noise) / tau) with the diagonal zeroed.
Matrix gumbel_mask_with_noise(const GumbelMask& gm, const Matrix& noise);

/// Reparameterized sample with fresh logistic noise.
Matrix gumbel_sample(const GumbelMask& gm, Rng& rng);

/// Deterministic mask sigmoid(U / tau), diagonal zeroed.
Matrix gumbel_eval(const GumbelMask& gm);

/// Chain rule through the sigmoid: dL/dU = dL/dmask o mask (1 - mask) / tau.
Matrix gumbel_backward(const Matrix& mask, const Matrix& grad_mask, double temperature);

/// sum(moral o mask); the l1 norm of a nonnegative mask.
PenaltyValue l0_penalty_gumbel(const Matrix& mask, const Skeleton& moral);

/// Stochastic gates z = clip(mu + eps, 0, 1), eps ~ N(0, gate_sigma^2).
struct StgParams {
    Matrix mu;
    double gate_sigma = 0.5;
};

Matrix stg_sample(const StgParams& p, Rng& rng);

/// Deterministic gate clip(mu, 0, 1), diagonal zeroed.
Matrix stg_eval(const StgParams& p);

/// Straight-through estimator: gradient passes where 0 < z < 1, zero elsewhere.
Matrix stg_backward(const Matrix& gates, const Matrix& grad_gates);

double normal_cdf(double x);
double normal_pdf(double x);

/// sum_ij Phi(mu_ij / sigma) M_ij, gradient phi(mu / sigma) / sigma o M.
PenaltyValue stg_penalty(const StgParams& p, const Skeleton& moral);

struct TanhParams {
    double c = 15.0;
};

/// sum_ij tanh(c |B_ij|); subgradient 0 at B_ij = 0.
PenaltyValue tanh_penalty(const WeightedAdjacency& b, const TanhParams& p);

}  // namespace calm
