#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cvbandit/cv_estimation.hpp"
#include "cvbandit/random.hpp"

namespace cvbandit {

/// Monte-Carlo moments of the estimators on jointly Gaussian data with
/// mean_x = 1, mean_w = omega = 0.5, std_x = 2, std_w = 1.5.
struct EstimatorStudy {
    double rho = 0.0;
    std::size_t s = 0;
    std::size_t replications = 0;

    double sigma2 = 4.0;           // reward variance
    double var_plain = 0.0;        // MC variance of the sample mean
    double var_known_beta = 0.0;   // MC variance of the mean of X + beta* (omega - W)
    double mean_cv = 0.0;          // MC mean of the control-variate estimate
    double var_cv = 0.0;           // MC variance of the control-variate estimate
    double mean_nu = 0.0;          // MC mean of the variance estimate
    double se_nu = 0.0;            // standard error of mean_nu
    std::size_t exceedances = 0;   // |cv - mu| >= V(t) sqrt(nu)
    std::int64_t coverage_t = 0;

    static constexpr double mu = 1.0;
};

/// Draw `replications` samples of size s and record the moments above.
/// Coverage uses percentile_v(coverage_t, 2, s - 2).
EstimatorStudy study_estimators(double rho, std::size_t s, std::size_t replications,
                                RandomSource rng, const EstimatorOptions& options = {},
                                std::int64_t coverage_t = 50);

/// Exact variance of the control-variate estimate (estimated beta) on
/// Gaussian data: (s - 2) / (s - 3) (1 - rho^2) sigma^2 / s.
double cv_estimate_variance(double rho, double sigma2, std::size_t s);

struct SelftestCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SelftestOptions {
    std::size_t replications = 100'000;
    std::uint64_t seed = 0x5eed;
};

/// The invariant suite run by `cvbandit selftest`.
std::vector<SelftestCheck> run_selftest(const SelftestOptions& options = {});

} // namespace cvbandit
