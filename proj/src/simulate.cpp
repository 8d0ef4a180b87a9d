#include "calm/simulate.hpp"

#include "calm/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace calm {

CovarianceInput CovarianceInput::from_samples(Matrix x) {
    require(x.rows() >= 1 && x.cols() >= 1, "CovarianceInput: empty sample matrix");
    CovarianceInput in;
    in.samples = std::move(x);
    return in;
}

CovarianceInput CovarianceInput::from_population(Matrix sigma, std::optional<long> n) {
    require(sigma.rows() == sigma.cols(), "CovarianceInput: covariance must be square");
    require((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + sigma.cwiseAbs().maxCoeff()),
            "CovarianceInput: covariance must be symmetric");
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) throw DomainError("CovarianceInput: covariance is not positive definite");
    CovarianceInput in;
    in.population_cov = std::move(sigma);
    in.nominal_n = n;
    return in;
}

Eigen::Index CovarianceInput::dim() const {
    return samples ? samples->cols() : population_cov->cols();
}

std::optional<long> CovarianceInput::sample_size() const {
    if (samples) return static_cast<long>(samples->rows());
    return nominal_n;
}

Matrix CovarianceInput::covariance() const {
    if (population_cov) return *population_cov;
    const Matrix centered = samples->rowwise() - samples->colwise().mean();
    return (centered.transpose() * centered) / static_cast<double>(samples->rows());
}

BinaryAdjacency sample_er_dag(const SimConfig& cfg, Rng& rng) {
    require(cfg.d >= 2, "sample_er_dag: d must be at least 2");
    require(cfg.er_k >= 1.0, "sample_er_dag: er_k must be at least 1");
    const int d = cfg.d;
    const double p = std::min(1.0, 2.0 * cfg.er_k / (d - 1));
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::bernoulli_distribution edge(p);
    BinaryAdjacency g = BinaryAdjacency::Zero(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            if (edge(rng)) g(perm[a], perm[b]) = 1;
    return g;
}

WeightedAdjacency assign_weights(const BinaryAdjacency& g, Rng& rng, double low, double high) {
    require(0.0 < low && low <= high, "assign_weights: need 0 < low <= high");
    std::uniform_real_distribution<double> mag(low, high);
    std::bernoulli_distribution negative(0.5);
    WeightedAdjacency w = WeightedAdjacency::Zero(g.rows(), g.cols());
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            if (g(i, j) != 0 && i != j) {
                const double m = mag(rng);
                w(i, j) = negative(rng) ? -m : m;
            }
    return w;
}

Vector assign_noise(int d, Rng& rng, double low, double high) {
    if (d < 2) throw InvalidArgument("assign_noise: d must be at least 2");
    require(0.0 < low && low <= high, "assign_noise: need 0 < low <= high");
    std::uniform_real_distribution<double> var(low, high);
    Vector omega(d);
    for (int i = 0; i < d; ++i) omega(i) = var(rng);
    std::uniform_int_distribution<int> pick(0, d - 1);
    const int lo = pick(rng);
    int hi = pick(rng);
    while (hi == lo) hi = pick(rng);
    omega(lo) = low;
    omega(hi) = high;
    return omega;
}

SemSpec simulate_sem(const SimConfig& cfg, Rng& rng) {
    const BinaryAdjacency g = sample_er_dag(cfg, rng);
    SemSpec sem;
    sem.b_true = assign_weights(g, rng, cfg.weight_low, cfg.weight_high);
    sem.omega = assign_noise(cfg.d, rng, cfg.noise_low, cfg.noise_high);
    return sem;
}

Matrix population_covariance(const SemSpec& sem) {
    const Eigen::Index d = sem.b_true.rows();
    require(sem.b_true.cols() == d && sem.omega.size() == d, "population_covariance: dimension mismatch");
    require((sem.omega.array() > 0.0).all(), "population_covariance: noise variances must be positive");
    const Matrix w = Matrix::Identity(d, d) - sem.b_true;
    Eigen::PartialPivLU<Matrix> lu(w);
    if (!(std::abs(lu.determinant()) > 0.0)) throw DomainError("population_covariance: I - B is singular");
    const Matrix winv = lu.inverse();
    Matrix sigma = winv.transpose() * sem.omega.asDiagonal() * winv;
    return 0.5 * (sigma + sigma.transpose());
}

Matrix sample_data(const SemSpec& sem, long n, Rng& rng) {
    require(n >= 1, "sample_data: n must be positive");
    const Eigen::Index d = sem.b_true.rows();
    const std::vector<int> order = topological_order(support(sem.b_true));
    require(static_cast<Eigen::Index>(order.size()) == d, "sample_data: b_true is cyclic");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix x(n, d);
    // column-at-a-time in topological order keeps each stream draw order fixed
    for (int j : order) {
        const double sd = std::sqrt(sem.omega(j));
        for (long r = 0; r < n; ++r) x(r, j) = sd * gauss(rng);
        for (int i = 0; i < d; ++i)
            if (sem.b_true(i, j) != 0.0) x.col(j) += sem.b_true(i, j) * x.col(i);
    }
    return x;
}

CovarianceInput standardize(const CovarianceInput& input) {
    CovarianceInput out = input;
    if (input.population_cov) {
        const Vector diag = input.population_cov->diagonal();
        if ((diag.array() <= 0.0).any()) throw DomainError("standardize: zero variance");
        const Vector s = diag.array().rsqrt();
        Matrix c = s.asDiagonal() * (*input.population_cov) * s.asDiagonal();
        c.diagonal().setOnes();
        out.population_cov = 0.5 * (c + c.transpose());
    } else {
        Matrix x = input.samples->rowwise() - input.samples->colwise().mean();
        const Eigen::RowVectorXd sd = (x.array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
        if ((sd.array() <= 0.0).any()) throw DomainError("standardize: zero variance column");
        x.array().rowwise() /= sd.array();
        out.samples = std::move(x);
    }
    out.standardized = true;
    return out;
}

}  // namespace calm
