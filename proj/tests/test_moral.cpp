#include "calm/graphs.hpp"
#include "calm/moral.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace calm;

namespace {

SemSpec chain3() {
    SemSpec s{Matrix::Zero(3, 3), Vector::Ones(3)};
    s.b_true(0, 1) = 0.8;
    s.b_true(1, 2) = -1.2;
    return s;
}

SemSpec collider3() {
    SemSpec s{Matrix::Zero(3, 3), Vector::Ones(3)};
    s.b_true(0, 1) = 0.8;
    s.b_true(2, 1) = 1.1;
    return s;
}

CovarianceInput sampled(const SemSpec& sem, long n, std::uint64_t seed) {
    Rng rng(seed);
    return CovarianceInput::from_samples(sample_data(sem, n, rng));
}

}  // namespace

TEST_CASE("partial correlation basics") {
    const Matrix id = Matrix::Identity(4, 4);
    CHECK(partial_correlation(id, 0, 1, {}) == 0.0);
    const Matrix s = population_covariance(chain3());
    CHECK(std::abs(partial_correlation(s, 0, 2, {1})) < 1e-10);
    CHECK(std::abs(partial_correlation(s, 0, 2, {})) > 0.1);
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
        const Matrix c = oracle::random_spd(5, rng);
        CHECK(partial_correlation(c, 1, 3, {0, 4}) == doctest::Approx(partial_correlation(c, 3, 1, {0, 4})).epsilon(1e-12));
    }
    Matrix sing = Matrix::Ones(2, 2);
    CHECK_THROWS_AS(partial_correlation(sing, 0, 1, {}), DomainError);
}

TEST_CASE("normal quantile inverts the cdf") {
    for (double p : {1e-10, 0.001, 0.025, 0.3, 0.5, 0.9, 0.975, 0.999999}) {
        const double x = normal_quantile(p);
        CHECK(0.5 * std::erfc(-x / std::sqrt(2.0)) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("Fisher-Z decisions") {
    const CiConfig cfg;
    CHECK(fisher_z_from_r(0.0, 50, 0, cfg).independent);
    const CiResult strong = fisher_z_from_r(0.5, 10000, 0, cfg);
    CHECK_FALSE(strong.independent);
    CHECK(strong.statistic == doctest::Approx(std::sqrt(9997.0) * std::atanh(0.5)));
    CHECK(strong.statistic == doctest::Approx(54.9).epsilon(1e-3));
    const CiResult weak = fisher_z_from_r(0.01, 100, 0, cfg);
    CHECK(weak.independent);
    CHECK(weak.statistic == doctest::Approx(0.0985).epsilon(1e-3));
    const CiResult perfect = fisher_z_from_r(1.0, 100, 0, cfg);
    CHECK_FALSE(perfect.independent);
    CHECK(perfect.p_value == 0.0);
    CHECK_THROWS_AS(fisher_z_from_r(0.1, 5, 2, cfg), InvalidArgument);
}

TEST_CASE("Fisher-Z on covariance input needs a sample size") {
    const CovarianceInput pop = CovarianceInput::from_population(population_covariance(chain3()));
    CHECK_THROWS_AS(fisher_z_test(pop, 0, 1, {}, CiConfig{}), InvalidArgument);
    const CovarianceInput with_n = CovarianceInput::from_population(population_covariance(chain3()), 1000);
    CHECK(fisher_z_test(with_n, 0, 2, {1}, CiConfig{}).independent);
    CHECK_FALSE(fisher_z_test(with_n, 0, 1, {}, CiConfig{}).independent);
}

TEST_CASE("IAMB blankets on small graphs") {
    const CovarianceInput chain = sampled(chain3(), 50000, 2);
    CHECK(iamb(chain, 1, CiConfig{}).members == std::vector<int>{0, 2});
    const CovarianceInput coll = sampled(collider3(), 50000, 3);
    CHECK(iamb(coll, 0, CiConfig{}).members == std::vector<int>{1, 2});

    const CovarianceInput indep = sampled(SemSpec{Matrix::Zero(4, 4), Vector::Ones(4)}, 50000, 4);
    // at alpha = 0.05 a spurious member appears with small probability; use a strict level
    for (int t = 0; t < 4; ++t) CHECK(iamb(indep, t, CiConfig{1e-4, std::nullopt}).members.empty());
}

TEST_CASE("estimated moral graphs of small graphs") {
    Skeleton chain_truth = moralize(support(chain3().b_true));
    CHECK(estimate_moral(sampled(chain3(), 50000, 5), CiConfig{}) == chain_truth);
    Skeleton coll_truth = moralize(support(collider3().b_true));
    CHECK(coll_truth(0, 2) == 1);
    CHECK(estimate_moral(sampled(collider3(), 50000, 6), CiConfig{}) == coll_truth);
    const CovarianceInput id = CovarianceInput::from_population(Matrix::Identity(4, 4), 1000);
    CHECK(estimate_moral(id, CiConfig{}) == Skeleton::Zero(4, 4));
}

TEST_CASE("estimated moral graphs are symmetric, hollow and deterministic") {
    Rng rng(7);
    SimConfig cfg;
    cfg.d = 8;
    for (int t = 0; t < 5; ++t) {
        const SemSpec sem = simulate_sem(cfg, rng);
        const CovarianceInput in = CovarianceInput::from_samples(sample_data(sem, 2000, rng));
        const Skeleton s = estimate_moral(in, CiConfig{});
        CHECK(s == s.transpose());
        CHECK(s.diagonal().sum() == 0);
        CHECK(estimate_moral(in, CiConfig{}) == s);
    }
}

TEST_CASE("max_cond_size caps the blanket") {
    const CovarianceInput coll = sampled(collider3(), 50000, 8);
    CHECK(iamb(coll, 0, CiConfig{0.05, 1}).members.size() <= 1);
}
