#include "calm/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace calm {

RelaxationKind parse_relaxation(const std::string& name) {
    if (name == "gumbel") return RelaxationKind::gumbel;
    if (name == "stg") return RelaxationKind::stg;
    if (name == "tanh") return RelaxationKind::tanh;
    if (name == "l1-direct") return RelaxationKind::l1_direct;
    throw InvalidArgument("unknown relaxation: " + name);
}

std::string to_string(RelaxationKind kind) {
    switch (kind) {
        case RelaxationKind::gumbel: return "gumbel";
        case RelaxationKind::stg: return "stg";
        case RelaxationKind::tanh: return "tanh";
        case RelaxationKind::l1_direct: return "l1-direct";
    }
    return "?";
}

Matrix logistic_noise(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    // open interval (0, 1) keeps both logs finite
    std::uniform_real_distribution<double> unif(std::numeric_limits<double>::min(), 1.0);
    Matrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) {
            double u = unif(rng);
            if (u >= 1.0) u = std::nextafter(1.0, 0.0);
            g(i, j) = std::log(u) - std::log1p(-u);
        }
    return g;
}

Matrix gumbel_mask_with_noise(const GumbelMask& gm, const Matrix& noise) {
    require(gm.temperature > 0.0, "gumbel mask: temperature must be positive");
    const double inv_tau = 1.0 / gm.temperature;
    Matrix m = ((gm.logits + noise) * inv_tau).unaryExpr([](double x) { return sigmoid(x); });
    m.diagonal().setZero();
    return m;
}

Matrix gumbel_sample(const GumbelMask& gm, Rng& rng) {
    return gumbel_mask_with_noise(gm, logistic_noise(gm.logits.rows(), gm.logits.cols(), rng));
}

Matrix gumbel_eval(const GumbelMask& gm) {
    return gumbel_mask_with_noise(gm, Matrix::Zero(gm.logits.rows(), gm.logits.cols()));
}

Matrix gumbel_backward(const Matrix& mask, const Matrix& grad_mask, double temperature) {
    return (grad_mask.array() * mask.array() * (1.0 - mask.array()) / temperature).matrix();
}

PenaltyValue l0_penalty_gumbel(const Matrix& mask, const Skeleton& moral) {
    require(mask.rows() == moral.rows() && mask.cols() == moral.cols(), "l0_penalty_gumbel: dimension mismatch");
    const Matrix filter = moral.cast<double>();
    return {(mask.array() * filter.array()).sum(), filter};
}

Matrix stg_sample(const StgParams& p, Rng& rng) {
    require(p.gate_sigma > 0.0, "stg_sample: gate_sigma must be positive");
    std::normal_distribution<double> eps(0.0, p.gate_sigma);
    Matrix z(p.mu.rows(), p.mu.cols());
    for (Eigen::Index j = 0; j < z.cols(); ++j)
        for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = std::clamp(p.mu(i, j) + eps(rng), 0.0, 1.0);
    z.diagonal().setZero();
    return z;
}

Matrix stg_eval(const StgParams& p) {
    Matrix z = p.mu.cwiseMax(0.0).cwiseMin(1.0);
    z.diagonal().setZero();
    return z;
}

Matrix stg_backward(const Matrix& gates, const Matrix& grad_gates) {
    return ((gates.array() > 0.0 && gates.array() < 1.0).cast<double>() * grad_gates.array()).matrix();
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

PenaltyValue stg_penalty(const StgParams& p, const Skeleton& moral) {
    require(p.gate_sigma > 0.0, "stg_penalty: gate_sigma must be positive");
    require(p.mu.rows() == moral.rows() && p.mu.cols() == moral.cols(), "stg_penalty: dimension mismatch");
    const double s = p.gate_sigma;
    const Matrix filter = moral.cast<double>();
    PenaltyValue out;
    out.value = (p.mu.unaryExpr([s](double m) { return normal_cdf(m / s); }).array() * filter.array()).sum();
    out.grad = (p.mu.unaryExpr([s](double m) { return normal_pdf(m / s) / s; }).array() * filter.array()).matrix();
    return out;
}

PenaltyValue tanh_penalty(const WeightedAdjacency& b, const TanhParams& p) {
    require(p.c > 0.0, "tanh_penalty: c must be positive");
    const double c = p.c;
    PenaltyValue out;
    out.value = b.unaryExpr([c](double x) { return std::tanh(c * std::abs(x)); }).sum();
    out.grad = b.unaryExpr([c](double x) {
        if (x == 0.0) return 0.0;
        const double t = std::tanh(c * std::abs(x));
        return c * (1.0 - t * t) * (x > 0.0 ? 1.0 : -1.0);
    });
    return out;
}

}  // namespace calm
