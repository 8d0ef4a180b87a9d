#include "calm/learners.hpp"

#include "calm/acyclicity.hpp"
#include "calm/graphs.hpp"

#include <chrono>
#include <cmath>

namespace calm {

void adam_step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads, AdamState& state) {
    require(params.size() == grads.size(), "adam_step: params and grads differ in count");
    if (state.m.size() != params.size()) {
        state.m.clear();
        state.v.clear();
        for (const Matrix* p : params) {
            state.m.push_back(Matrix::Zero(p->rows(), p->cols()));
            state.v.push_back(Matrix::Zero(p->rows(), p->cols()));
        }
        state.step = 0;
    }
    ++state.step;
    const AdamConfig& c = state.cfg;
    const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Matrix& p = *params[k];
        const Matrix& g = *grads[k];
        require(p.rows() == g.rows() && p.cols() == g.cols() && state.m[k].rows() == p.rows() &&
                    state.m[k].cols() == p.cols(),
                "adam_step: shape mismatch");
        state.m[k] = c.beta1 * state.m[k] + (1.0 - c.beta1) * g;
        state.v[k] = c.beta2 * state.v[k] + (1.0 - c.beta2) * g.cwiseAbs2();
        p.array() -= c.lr * (state.m[k].array() / bias1) / ((state.v[k].array() / bias2).sqrt() + c.epsilon);
    }
}

ConstraintMode parse_constraint(const std::string& name) {
    if (name == "hard-qpm" || name == "hard") return ConstraintMode::hard_qpm;
    if (name == "soft") return ConstraintMode::soft;
    throw InvalidArgument("unknown constraint mode: " + name);
}

std::string to_string(ConstraintMode mode) { return mode == ConstraintMode::hard_qpm ? "hard-qpm" : "soft"; }

MoralFilter parse_moral_filter(const std::string& name) {
    if (name == "exact") return MoralFilter::exact;
    if (name == "estimated") return MoralFilter::estimated;
    if (name == "none") return MoralFilter::none;
    throw InvalidArgument("unknown moral filter: " + name);
}

std::string to_string(MoralFilter filter) {
    switch (filter) {
        case MoralFilter::exact: return "exact";
        case MoralFilter::estimated: return "estimated";
        case MoralFilter::none: return "none";
    }
    return "?";
}

void MethodConfig::validate() const {
    require(lambda1 >= 0.0, "method config: lambda1 must be nonnegative");
    require(lambda2 >= 0.0, "method config: lambda2 must be nonnegative");
    require(threshold > 0.0 && threshold < 1.0, "method config: threshold must lie in (0, 1)");
    require(temperature > 0.0, "method config: temperature must be positive");
    require(stg_sigma > 0.0, "method config: stg sigma must be positive");
    require(tanh_c > 0.0, "method config: tanh c must be positive");
    require(qpm.rho_init > 0.0 && qpm.rho_factor > 1.0 && qpm.inner_iters >= 1 && qpm.h_tol > 0.0,
            "method config: invalid QPM schedule");
    require(soft_iters >= 1, "method config: soft_iters must be positive");
}

MethodConfig method_preset(const std::string& name) {
    MethodConfig c;
    c.name = name;
    if (name == "calm") return c;
    if (name == "calm-stg") {
        c.relaxation = RelaxationKind::stg;
        return c;
    }
    if (name == "calm-tanh") {
        c.relaxation = RelaxationKind::tanh;
        return c;
    }
    if (name == "hard-no-moral") {
        c.moral_filter = MoralFilter::none;
        return c;
    }
    if (name == "soft-moral") {
        c.constraint = ConstraintMode::soft;
        return c;
    }
    if (name == "soft-no-moral") {
        c.constraint = ConstraintMode::soft;
        c.moral_filter = MoralFilter::none;
        return c;
    }
    if (name == "golem-nv-l1") {
        c.relaxation = RelaxationKind::l1_direct;
        c.constraint = ConstraintMode::soft;
        c.moral_filter = MoralFilter::none;
        c.lambda1 = 2e-3;
        c.lambda2 = 5.0;
        c.threshold = 0.1;
        c.soft_iters = 100000;
        return c;
    }
    if (name == "notears") {
        c.objective = ObjectiveKind::least_squares;
        c.relaxation = RelaxationKind::l1_direct;
        c.moral_filter = MoralFilter::none;
        c.lambda1 = 0.1;
        c.threshold = 0.1;
        return c;
    }
    if (name == "colide") {
        c.objective = ObjectiveKind::colide_nv;
        return c;
    }
    throw InvalidArgument("unknown method: " + name);
}

std::vector<std::string> method_names() {
    return {"calm", "calm-stg", "calm-tanh", "hard-no-moral", "soft-moral", "soft-no-moral",
            "golem-nv-l1", "notears", "colide"};
}

Skeleton full_skeleton(Eigen::Index d) {
    Skeleton s = Skeleton::Ones(d, d);
    s.diagonal().setZero();
    return s;
}

namespace {

struct Snapshot {
    double loss = 0.0;
    double penalty = 0.0;
    double h = 0.0;
};

// Holds the trainable tensors of one model and performs stochastic gradient steps.
//   gumbel / stg: A = F o mask, B = A o P
//   tanh / l1-direct: B = F o P, constraint on A = B o B
class Trainer {
public:
    Trainer(const Matrix& sigma, const Skeleton& moral, const MethodConfig& cfg)
        : cfg_(cfg), sigma_(sigma), d_(sigma.rows()), rng_(make_rng(cfg.seed)) {
        filter_ = moral.cast<double>();
        filter_.diagonal().setZero();
        std::uniform_real_distribution<double> init(-cfg.weight_init, cfg.weight_init);
        weights_.resize(d_, d_);
        for (Eigen::Index j = 0; j < d_; ++j)
            for (Eigen::Index i = 0; i < d_; ++i) weights_(i, j) = init(rng_);
        weights_.diagonal().setZero();
        switch (cfg.relaxation) {
            case RelaxationKind::gumbel: gate_ = Matrix::Zero(d_, d_); break;
            case RelaxationKind::stg: gate_ = Matrix::Constant(d_, d_, cfg.stg_mu_init); break;
            case RelaxationKind::tanh:
            case RelaxationKind::l1_direct:
                weights_ = weights_.cwiseProduct(filter_);
                if (cfg.relaxation == RelaxationKind::l1_direct) weights_.setZero();
                break;
        }
        if (cfg.objective == ObjectiveKind::colide_nv) log_omega_ = sigma.diagonal().array().log().matrix();
        grad_w_.resize(d_, d_);
    }

    bool has_gate() const {
        return cfg_.relaxation == RelaxationKind::gumbel || cfg_.relaxation == RelaxationKind::stg;
    }

    // weight on h in the gradient: rho * h for the quadratic penalty, lambda2 for soft.
    void iterate(AdamState& adam, bool hard, double rho) {
        Matrix mask;
        Matrix a, b;
        if (cfg_.relaxation == RelaxationKind::gumbel) {
            mask = gumbel_sample(GumbelMask{gate_, cfg_.temperature, {}}, rng_);
            a = filter_.cwiseProduct(mask);
            b = a.cwiseProduct(weights_);
        } else if (cfg_.relaxation == RelaxationKind::stg) {
            mask = stg_sample(StgParams{gate_, cfg_.stg_sigma}, rng_);
            a = filter_.cwiseProduct(mask);
            b = a.cwiseProduct(weights_);
        } else {
            b = filter_.cwiseProduct(weights_);
            a = b.cwiseAbs2();
        }

        const ObjectiveValue<double> obj = objective(b);
        const ConstraintValue<double> hv = h_poly(a);
        const double hcoef = hard ? rho * hv.h : cfg_.lambda2;

        switch (cfg_.relaxation) {
            case RelaxationKind::gumbel: {
                const Matrix dmask =
                    filter_.cwiseProduct(obj.grad_b.cwiseProduct(weights_) + hcoef * hv.grad) + cfg_.lambda1 * filter_;
                grad_gate_ = gumbel_backward(mask, dmask, cfg_.temperature);
                grad_w_ = obj.grad_b.cwiseProduct(a);
                break;
            }
            case RelaxationKind::stg: {
                const Matrix dmask = filter_.cwiseProduct(obj.grad_b.cwiseProduct(weights_) + hcoef * hv.grad);
                grad_gate_ = stg_backward(mask, dmask) +
                             cfg_.lambda1 * stg_penalty(StgParams{gate_, cfg_.stg_sigma}, filter_.cast<int>()).grad;
                grad_gate_.diagonal().setZero();
                grad_w_ = obj.grad_b.cwiseProduct(a);
                break;
            }
            case RelaxationKind::tanh: {
                const Matrix db = obj.grad_b + cfg_.lambda1 * tanh_penalty(b, TanhParams{cfg_.tanh_c}).grad +
                                  2.0 * hcoef * hv.grad.cwiseProduct(b);
                grad_w_ = filter_.cwiseProduct(db);
                break;
            }
            case RelaxationKind::l1_direct: {
                const Matrix sign = b.unaryExpr([](double x) { return double((x > 0.0) - (x < 0.0)); });
                const Matrix db = obj.grad_b + cfg_.lambda1 * sign + 2.0 * hcoef * hv.grad.cwiseProduct(b);
                grad_w_ = filter_.cwiseProduct(db);
                break;
            }
        }

        std::vector<Matrix*> params{&weights_};
        std::vector<const Matrix*> grads{&grad_w_};
        if (has_gate()) {
            params.push_back(&gate_);
            grads.push_back(&grad_gate_);
        }
        if (obj.grad_omega) {
            // chain rule through omega = exp(log_omega)
            grad_log_omega_ = obj.grad_omega->cwiseProduct(log_omega_.array().exp().matrix());
            params.push_back(&log_omega_);
            grads.push_back(&grad_log_omega_);
        }
        adam_step(params, grads, adam);
    }

    // Noise-free quantities used for stopping, history and thresholding.
    Matrix constraint_input() const {
        if (has_gate()) return filter_.cwiseProduct(deterministic_mask());
        return filter_.cwiseProduct(weights_).cwiseAbs2();
    }

    Matrix deterministic_mask() const {
        if (cfg_.relaxation == RelaxationKind::gumbel) return gumbel_eval(GumbelMask{gate_, cfg_.temperature, {}});
        return stg_eval(StgParams{gate_, cfg_.stg_sigma});
    }

    Matrix deterministic_b() const {
        if (has_gate()) return constraint_input().cwiseProduct(weights_);
        return filter_.cwiseProduct(weights_);
    }

    Snapshot snapshot() const {
        Snapshot s;
        const Matrix b = deterministic_b();
        s.loss = objective(b).value;
        s.h = h_poly(constraint_input()).h;
        switch (cfg_.relaxation) {
            case RelaxationKind::gumbel: s.penalty = constraint_input().sum(); break;
            case RelaxationKind::stg:
                s.penalty = stg_penalty(StgParams{gate_, cfg_.stg_sigma}, filter_.cast<int>()).value;
                break;
            case RelaxationKind::tanh: s.penalty = tanh_penalty(b, TanhParams{cfg_.tanh_c}).value; break;
            case RelaxationKind::l1_direct: s.penalty = b.cwiseAbs().sum(); break;
        }
        return s;
    }

    // Edge probabilities in [0, 1] (already filtered) and the weights kept on selected edges.
    void extract(FitResult& out) const {
        const Skeleton filter = filter_.cast<int>();
        BinaryAdjacency chosen;
        Matrix weights;
        if (has_gate()) {
            out.mask_probs = constraint_input();
            chosen = threshold_mask(out.mask_probs, filter, cfg_.threshold);
            weights = weights_;
        } else {
            const Matrix b = filter_.cwiseProduct(weights_);
            if (cfg_.relaxation == RelaxationKind::tanh) {
                const double c = cfg_.tanh_c;
                out.mask_probs = b.unaryExpr([c](double x) { return std::tanh(c * std::abs(x)); });
            } else {
                out.mask_probs = b.cwiseAbs().cwiseMin(1.0);
            }
            chosen = cfg_.relaxation == RelaxationKind::tanh ? threshold_mask(out.mask_probs, filter, cfg_.threshold)
                                                             : support(b, cfg_.threshold);
            weights = b;
        }
        WeightedAdjacency est = chosen.cast<double>().cwiseProduct(weights);
        if (!is_acyclic(support(est))) est = postprocess_to_dag(est);
        out.b_est = std::move(est);
        out.final_loss = objective(out.b_est).value;
    }

private:
    ObjectiveValue<double> objective(const Matrix& b) const {
        switch (cfg_.objective) {
            case ObjectiveKind::golem_nv: return golem_nv_loss(b, sigma_);
            case ObjectiveKind::least_squares: return least_squares_loss(b, sigma_);
            case ObjectiveKind::colide_nv: return colide_nv_loss(b, sigma_, log_omega_.array().exp().matrix());
        }
        throw InvalidArgument("unknown objective");
    }

    const MethodConfig& cfg_;
    const Matrix& sigma_;
    Eigen::Index d_;
    Rng rng_;
    Matrix filter_;
    Matrix weights_;
    Matrix gate_;
    Matrix log_omega_;
    Matrix grad_w_, grad_gate_, grad_log_omega_;
};

Matrix checked_covariance(const CovarianceInput& input) {
    Matrix sigma = input.covariance();
    if ((sigma.diagonal().array() <= 0.0).any()) throw DomainError("fit: zero variance column in input");
    return sigma;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

FitResult run_qpm(const CovarianceInput& input, const Skeleton& moral, const MethodConfig& cfg) {
    cfg.validate();
    const auto t0 = Clock::now();
    const Matrix sigma = checked_covariance(input);
    require(moral.rows() == sigma.rows() && moral.cols() == sigma.cols(), "fit: moral graph dimension mismatch");
    Trainer trainer(sigma, moral, cfg);
    FitResult out;
    out.converged = false;
    double rho = cfg.qpm.rho_init;
    while (true) {
        AdamState adam(cfg.adam);
        for (long it = 0; it < cfg.qpm.inner_iters; ++it) trainer.iterate(adam, true, rho);
        const Snapshot s = trainer.snapshot();
        out.history.push_back({rho, s.loss, s.penalty, s.h, cfg.qpm.inner_iters});
        if (s.h < cfg.qpm.h_tol) {
            out.converged = true;
            break;
        }
        rho *= cfg.qpm.rho_factor;
        if (rho > cfg.qpm.rho_max) break;
    }
    trainer.extract(out);
    out.wall_time = seconds_since(t0);
    return out;
}

FitResult run_soft(const CovarianceInput& input, const Skeleton& moral, const MethodConfig& cfg) {
    cfg.validate();
    const auto t0 = Clock::now();
    const Matrix sigma = checked_covariance(input);
    require(moral.rows() == sigma.rows() && moral.cols() == sigma.cols(), "fit: moral graph dimension mismatch");
    Trainer trainer(sigma, moral, cfg);
    AdamState adam(cfg.adam);
    for (long it = 0; it < cfg.soft_iters; ++it) trainer.iterate(adam, false, 0.0);
    FitResult out;
    const Snapshot s = trainer.snapshot();
    out.history.push_back({cfg.lambda2, s.loss, s.penalty, s.h, cfg.soft_iters});
    trainer.extract(out);
    out.wall_time = seconds_since(t0);
    return out;
}

}  // namespace

FitResult calm_fit(const CovarianceInput& input, const Skeleton& moral, const MethodConfig& cfg) {
    require(cfg.constraint == ConstraintMode::hard_qpm, "calm_fit: requires the hard constraint mode");
    return run_qpm(input, moral, cfg);
}

FitResult soft_fit(const CovarianceInput& input, const Skeleton& moral, const MethodConfig& cfg) {
    require(cfg.constraint == ConstraintMode::soft, "soft_fit: requires the soft constraint mode");
    return run_soft(input, moral, cfg);
}

FitResult golem_nv_l1_fit(const CovarianceInput& input, const MethodConfig& cfg) {
    MethodConfig c = cfg;
    c.objective = ObjectiveKind::golem_nv;
    c.relaxation = RelaxationKind::l1_direct;
    c.constraint = ConstraintMode::soft;
    return run_soft(input, full_skeleton(input.dim()), c);
}

FitResult notears_fit(const CovarianceInput& input, const MethodConfig& cfg) {
    MethodConfig c = cfg;
    c.objective = ObjectiveKind::least_squares;
    c.relaxation = RelaxationKind::l1_direct;
    c.constraint = ConstraintMode::hard_qpm;
    return run_qpm(input, full_skeleton(input.dim()), c);
}

FitResult colide_fit(const CovarianceInput& input, const Skeleton& moral, const MethodConfig& cfg) {
    MethodConfig c = cfg;
    c.objective = ObjectiveKind::colide_nv;
    return run_qpm(input, moral, c);
}

FitResult fit(const CovarianceInput& input, const Skeleton& moral, const MethodConfig& cfg) {
    return cfg.constraint == ConstraintMode::hard_qpm ? run_qpm(input, moral, cfg) : run_soft(input, moral, cfg);
}

}  // namespace calm
