#pragma once

// Moral graph estimation: Fisher-Z conditional independence tests driving
// grow/shrink Markov blanket discovery (IAMB).

#include "calm/simulate.hpp"
#include "calm/types.hpp"

#include <optional>
#include <vector>

namespace calm {

struct CiConfig {
    double alpha = 0.05;
    std::optional<int> max_cond_size;
};

struct MarkovBlanket {
    int target = 0;
    std::vector<int> members;  // ascending
};

struct CiResult {
    bool independent = true;
    double p_value = 1.0;
    double statistic = 0.0;
};

/// Partial correlation of i and j given `cond`, from the inverse of the
/// covariance submatrix on {i, j} U cond.
double partial_correlation(const Matrix& cov, int i, int j, const std::vector<int>& cond);

/// Inverse standard normal CDF.
double normal_quantile(double p);

/// Fisher-Z test from a partial correlation and sample size.
/// Independence is rejected iff sqrt(n - |cond| - 3) |atanh(r)| > Phi^{-1}(1 - alpha/2).
CiResult fisher_z_from_r(double r, long n, int cond_size, const CiConfig& cfg);

CiResult fisher_z_test(const CovarianceInput& input, int i, int j, const std::vector<int>& cond,
                       const CiConfig& cfg);

/// Markov blanket of `target`. Grow: add the most associated variable while it tests
/// dependent (ties to the lowest index). Shrink: drop members independent given the rest.
MarkovBlanket iamb(const CovarianceInput& input, int target, const CiConfig& cfg);

/// Covariance-level variant used by iamb; `n` is the sample size for the tests.
MarkovBlanket iamb(const Matrix& cov, long n, int target, const CiConfig& cfg);

/// Union of all blankets: edge i - j iff j in MB(i) or i in MB(j).
Skeleton estimate_moral(const CovarianceInput& input, const CiConfig& cfg);

}  // namespace calm
