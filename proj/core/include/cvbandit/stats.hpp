#pragma once

#include <cstdint>

namespace cvbandit {

/// Regularized incomplete beta function I_x(a, b).
/// Throws std::domain_error unless a > 0, b > 0 and 0 <= x <= 1.
double regularized_incomplete_beta(double a, double b, double x);

/// Inverse of regularized_incomplete_beta in x for fixed (a, b).
double inverse_regularized_incomplete_beta(double a, double b, double p);

/// Standard normal cdf probability and its inverse.
double normal_cdf(double x);
double normal_quantile(double p);

/// Student-t distribution with an integer number of degrees of freedom.
class StudentT {
public:
    explicit StudentT(std::int64_t dof);

    std::int64_t dof() const noexcept { return dof_; }

    double pdf(double x) const;
    double cdf(double x) const;
    // Upper tail P(T > x), computed without cancellation for large x.
    double sf(double x) const;

    // Inverse of cdf; p in (0, 1).
    double quantile(double p) const;
    // Inverse of sf; q in (0, 1). Preferred for q close to 0.
    double upper_quantile(double q) const;

private:
    std::int64_t dof_;
};

double t_quantile(double p, std::int64_t dof);

/// The 100(1 - 1/t^alpha)-th percentile of a Student-t with `dof` degrees
/// of freedom. Memoized per thread on (t, alpha, dof).
double percentile_v(std::int64_t t, double alpha, std::int64_t dof);

} // namespace cvbandit
