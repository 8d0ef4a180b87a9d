#include "calm/moral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace calm {

double partial_correlation(const Matrix& cov, int i, int j, const std::vector<int>& cond) {
    const int d = static_cast<int>(cov.rows());
    require(cov.cols() == d, "partial_correlation: covariance must be square");
    require(i >= 0 && i < d && j >= 0 && j < d && i != j, "partial_correlation: bad indices");
    std::vector<int> idx{i, j};
    for (int c : cond) {
        require(c >= 0 && c < d && c != i && c != j, "partial_correlation: bad conditioning index");
        idx.push_back(c);
    }
    const auto k = static_cast<Eigen::Index>(idx.size());
    Matrix sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = cov(idx[a], idx[b]);
    Eigen::LDLT<Matrix> ldlt(sub);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || (ldlt.vectorD().array() <= 0.0).any())
        throw DomainError("partial_correlation: singular covariance submatrix");
    const Matrix prec = ldlt.solve(Matrix::Identity(k, k));
    const double r = -prec(0, 1) / std::sqrt(prec(0, 0) * prec(1, 1));
    return std::clamp(r, -1.0, 1.0);
}

double normal_quantile(double p) {
    require(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0, 1)");
    // Acklam's rational approximation, then one Halley step on erfc.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double e[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((e[0] * q + e[1]) * q + e[2]) * q + e[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((e[0] * q + e[1]) * q + e[2]) * q + e[3]) * q + 1.0);
    }
    const double err = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = err * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

CiResult fisher_z_from_r(double r, long n, int cond_size, const CiConfig& cfg) {
    require(cfg.alpha > 0.0 && cfg.alpha < 1.0, "fisher_z_test: alpha must lie in (0, 1)");
    const long dof = n - cond_size - 3;
    if (dof <= 0) throw InvalidArgument("fisher_z_test: insufficient sample size for conditioning set");
    CiResult out;
    if (std::abs(r) >= 1.0) {
        out.independent = false;
        out.p_value = 0.0;
        out.statistic = std::numeric_limits<double>::infinity();
        return out;
    }
    out.statistic = std::sqrt(static_cast<double>(dof)) * std::abs(std::atanh(r));
    out.p_value = std::erfc(out.statistic / std::numbers::sqrt2);
    out.independent = !(out.statistic > normal_quantile(1.0 - cfg.alpha / 2.0));
    return out;
}

CiResult fisher_z_test(const CovarianceInput& input, int i, int j, const std::vector<int>& cond,
                       const CiConfig& cfg) {
    const auto n = input.sample_size();
    if (!n) throw InvalidArgument("fisher_z_test: population covariance has no sample size attached");
    return fisher_z_from_r(partial_correlation(input.covariance(), i, j, cond), *n,
                           static_cast<int>(cond.size()), cfg);
}

MarkovBlanket iamb(const Matrix& cov, long n, int target, const CiConfig& cfg) {
    const int d = static_cast<int>(cov.rows());
    require(target >= 0 && target < d, "iamb: target out of range");
    std::vector<int> mb;
    std::vector<char> in_mb(d, 0);

    auto dependent = [&](int x, const std::vector<int>& cond, double* strength) {
        const double r = partial_correlation(cov, target, x, cond);
        const CiResult t = fisher_z_from_r(r, n, static_cast<int>(cond.size()), cfg);
        if (strength) *strength = std::abs(r);
        return !t.independent;
    };

    // grow
    while (true) {
        if (cfg.max_cond_size && static_cast<int>(mb.size()) >= *cfg.max_cond_size) break;
        if (n - static_cast<long>(mb.size()) - 3 <= 0) break;
        int best = -1;
        double best_assoc = -1.0;
        for (int x = 0; x < d; ++x) {
            if (x == target || in_mb[x]) continue;
            double assoc = 0.0;
            if (dependent(x, mb, &assoc) && assoc > best_assoc) {
                best_assoc = assoc;
                best = x;
            }
        }
        if (best < 0) break;
        mb.push_back(best);
        in_mb[best] = 1;
    }

    // shrink
    bool removed = true;
    while (removed) {
        removed = false;
        std::sort(mb.begin(), mb.end());
        for (std::size_t k = 0; k < mb.size(); ++k) {
            std::vector<int> rest;
            for (std::size_t m = 0; m < mb.size(); ++m)
                if (m != k) rest.push_back(mb[m]);
            if (!dependent(mb[k], rest, nullptr)) {
                mb = std::move(rest);
                removed = true;
                break;
            }
        }
    }
    std::sort(mb.begin(), mb.end());
    return {target, mb};
}

MarkovBlanket iamb(const CovarianceInput& input, int target, const CiConfig& cfg) {
    const auto n = input.sample_size();
    if (!n) throw InvalidArgument("iamb: population covariance has no sample size attached");
    return iamb(input.covariance(), *n, target, cfg);
}

Skeleton estimate_moral(const CovarianceInput& input, const CiConfig& cfg) {
    const auto n = input.sample_size();
    if (!n) throw InvalidArgument("estimate_moral: population covariance has no sample size attached");
    const Matrix cov = input.covariance();
    const int d = static_cast<int>(cov.rows());
    Skeleton s = Skeleton::Zero(d, d);
    for (int t = 0; t < d; ++t)
        for (int m : iamb(cov, *n, t, cfg).members) s(t, m) = s(m, t) = 1;
    return s;
}

}  // namespace calm
