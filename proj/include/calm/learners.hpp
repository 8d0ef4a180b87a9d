#pragma once

#include "calm/objectives.hpp"
#include "calm/simulate.hpp"
#include "calm/sparsity.hpp"
#include "calm/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace calm {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Moments for a list of parameter tensors, all updated together.
struct AdamState {
    AdamConfig cfg;
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    long step = 0;

    AdamState() = default;
    explicit AdamState(AdamConfig c) : cfg(c) {}
};

/// One bias-corrected Adam update of every parameter in `params`.
/// Moments are allocated on first use from the parameter shapes.
void adam_step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads, AdamState& state);

struct QpmSchedule {
    double rho_init = 1e-5;
    double rho_factor = 3.0;
    long inner_iters = 40000;
    double h_tol = 1e-8;
    double rho_max = 1e16;
};

enum class ConstraintMode { hard_qpm, soft };
enum class MoralFilter { exact, estimated, none };

ConstraintMode parse_constraint(const std::string& name);
std::string to_string(ConstraintMode mode);
MoralFilter parse_moral_filter(const std::string& name);
std::string to_string(MoralFilter filter);

struct MethodConfig {
    std::string name = "calm";
    ObjectiveKind objective = ObjectiveKind::golem_nv;
    RelaxationKind relaxation = RelaxationKind::gumbel;
    ConstraintMode constraint = ConstraintMode::hard_qpm;
    MoralFilter moral_filter = MoralFilter::exact;
    double lambda1 = 0.005;
    double lambda2 = 0.1;   // soft constraint weight
    double threshold = 0.5;
    std::uint64_t seed = 0;

    double temperature = 0.5;      // Gumbel
    double weight_init = 1e-3;     // P ~ U(-weight_init, weight_init)
    double stg_mu_init = 0.5;
    double stg_sigma = 0.5;
    double tanh_c = 15.0;

    AdamConfig adam;
    QpmSchedule qpm;
    long soft_iters = 40000;

    void validate() const;
};

/// Named configurations: calm, calm-stg, calm-tanh, hard-no-moral, soft-moral,
/// soft-no-moral, golem-nv-l1, notears, colide.
MethodConfig method_preset(const std::string& name);
std::vector<std::string> method_names();

struct SubproblemRecord {
    double rho = 0.0;
    double loss = 0.0;
    double penalty = 0.0;
    double h = 0.0;
    long iterations = 0;
};

struct FitResult {
    WeightedAdjacency b_est;
    Matrix mask_probs;
    std::vector<SubproblemRecord> history;
    double wall_time = 0.0;
    bool converged = true;
    /// Objective value (without penalties) at b_est.
    double final_loss = 0.0;
};

/// Skeleton with every off-diagonal pair present; the "no moral filter" case.
Skeleton full_skeleton(Eigen::Index d);

/// Mask-parameterized fit under the quadratic penalty method: for rho = rho_init,
/// rho_init * factor, ... minimize loss + lambda1 * penalty + rho/2 * h^2, stopping once h
/// of the deterministic mask falls below h_tol.
FitResult calm_fit(const CovarianceInput& input, const Skeleton& moral, const MethodConfig& cfg);

/// Same model with lambda2 * h added to the objective, optimized once; the thresholded
/// result is post-processed to a DAG.
FitResult soft_fit(const CovarianceInput& input, const Skeleton& moral, const MethodConfig& cfg);

/// Direct B parameterization: profiled likelihood + lambda1 |B|_1 + lambda2 h(B o B).
FitResult golem_nv_l1_fit(const CovarianceInput& input, const MethodConfig& cfg);

/// Least squares + lambda1 |B|_1 with the hard constraint on B o B through QPM.
FitResult notears_fit(const CovarianceInput& input, const MethodConfig& cfg);

/// calm_fit with the non-profiled score; noise variances trained through their logarithm.
FitResult colide_fit(const CovarianceInput& input, const Skeleton& moral, const MethodConfig& cfg);

/// Dispatch on cfg.constraint / cfg.relaxation / cfg.objective.
FitResult fit(const CovarianceInput& input, const Skeleton& moral, const MethodConfig& cfg);

}  // namespace calm
