#include "cvbandit/stats.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace cvbandit {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Stirling remainder lgamma(x) - [(x - 1/2) ln x - x + ln(2 pi)/2], x >= 10.
double stirling_correction(double x) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return inv * (1.0 / 12.0 -
                  inv2 * (1.0 / 360.0 -
                          inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
}

// lgamma(a) - lgamma(a + b) without the catastrophic cancellation of two
// large lgamma values.
double lgamma_ratio(double a, double b) {
    if (a < 10.0) return std::lgamma(a) - std::lgamma(a + b);
    return -(a - 0.5) * std::log1p(b / a) - b * std::log(a + b) + b +
           stirling_correction(a) - stirling_correction(a + b);
}

double log_beta(double a, double b) {
    if (a < b) std::swap(a, b);
    // a >= b
    return std::lgamma(b) + lgamma_ratio(a, b);
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr int max_iter = 100000;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= 2.0 * kEps) return h;
    }
    throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

// I_x(a, b) given both x and y = 1 - x, so callers holding an accurate
// complement avoid the 1 - x rounding.
double ibeta_xy(double a, double b, double x, double y) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    const bool flip = x > (a + 1.0) / (a + b + 2.0);
    if (flip) {
        std::swap(a, b);
        std::swap(x, y);
    }
    const double log_x = x < 0.5 ? std::log(x) : std::log1p(-y);
    const double log_y = y < 0.5 ? std::log(y) : std::log1p(-x);
    const double front = std::exp(a * log_x + b * log_y - log_beta(a, b)) / a;
    const double value = front * beta_continued_fraction(a, b, x);
    return flip ? 1.0 - value : value;
}

double lower_tail_ibeta_for_t(double nu, double x) {
    // P(|T| > x) = I_{nu/(nu+x^2)}(nu/2, 1/2)
    const double x2 = x * x;
    const double z = nu / (nu + x2);
    const double y = x2 / (nu + x2);
    return ibeta_xy(0.5 * nu, 0.5, z, y);
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0) || !std::isfinite(a) ||
        !std::isfinite(b))
        throw std::domain_error("regularized_incomplete_beta: require a > 0, b > 0, x in [0,1]");
    return ibeta_xy(a, b, x, 1.0 - x);
}

double inverse_regularized_incomplete_beta(double a, double b, double p) {
    if (!(a > 0.0) || !(b > 0.0) || !(p >= 0.0 && p <= 1.0))
        throw std::domain_error("inverse_regularized_incomplete_beta: require a > 0, b > 0, p in [0,1]");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    double x = a / (a + b);
    const double lbeta = log_beta(a, b);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = ibeta_xy(a, b, x, 1.0 - x) - p;
        if (f == 0.0) return x;
        if (f < 0.0) lo = x; else hi = x;
        const double log_pdf = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta;
        double next = x - f / std::exp(log_pdf);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) <= 4.0 * kEps * std::max(x, 1e-300) || hi - lo <= 4.0 * kEps * hi)
            return next;
        x = next;
    }
    return x;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0,1)");
    // Acklam's rational approximation followed by one Halley refinement.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00, 2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

StudentT::StudentT(std::int64_t dof) : dof_(dof) {
    if (dof < 1) throw std::domain_error("StudentT: degrees of freedom must be >= 1");
}

double StudentT::pdf(double x) const {
    const double nu = static_cast<double>(dof_);
    const double log_norm = lgamma_ratio(0.5 * nu, 0.5) * -1.0 - 0.5 * std::log(nu * std::numbers::pi);
    return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

double StudentT::sf(double x) const {
    if (std::isnan(x)) return x;
    if (x == 0.0) return 0.5;
    const double nu = static_cast<double>(dof_);
    if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
    const double tail = 0.5 * lower_tail_ibeta_for_t(nu, x);
    return x > 0.0 ? tail : 1.0 - tail;
}

double StudentT::cdf(double x) const {
    if (x == 0.0) return 0.5;
    return sf(-x);
}

double StudentT::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("t_quantile: p must lie in (0,1)");
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -upper_quantile(p);
    return upper_quantile(1.0 - p);
}

double StudentT::upper_quantile(double q) const {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("t_quantile: q must lie in (0,1)");
    if (q == 0.5) return 0.0;
    if (q > 0.5) return -upper_quantile(1.0 - q);

    if (dof_ == 1) return 1.0 / std::tan(std::numbers::pi * q);
    if (dof_ == 2) return (1.0 - 2.0 * q) / std::sqrt(2.0 * q * (1.0 - q));

    const double nu = static_cast<double>(dof_);
    // Cornish-Fisher start from the normal quantile.
    const double z = -normal_quantile(q);
    const double z2 = z * z;
    double x = z + z * (z2 + 1.0) / (4.0 * nu) +
               z * ((5.0 * z2 + 16.0) * z2 + 3.0) / (96.0 * nu * nu) +
               z * (((3.0 * z2 + 19.0) * z2 + 17.0) * z2 - 15.0) / (384.0 * nu * nu * nu);
    // The polynomial-tail form is a better start for few degrees of freedom.
    const double tail_start =
        std::pow(q * nu * std::sqrt(nu * std::numbers::pi) *
                     std::exp(lgamma_ratio(0.5 * nu, 0.5)) / std::pow(nu, 0.5 * (nu + 1.0)) ,
                 -1.0 / nu);
    if (std::isfinite(tail_start) && tail_start > x) x = tail_start;
    if (!(x > 0.0) || !std::isfinite(x)) x = 1.0;

    // Safeguarded Newton on log sf(x) - log q inside a bracket [lo, hi].
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    const double log_q = std::log(q);
    for (int iter = 0; iter < 200; ++iter) {
        const double tail = sf(x);
        const double g = std::log(tail) - log_q;
        if (g > 0.0) lo = x; else hi = x;
        if (std::fabs(tail - q) <= 1e-15 * q) return x;
        const double slope = -pdf(x) / tail;
        double next = x - g / slope;
        if (!(next > lo && next < hi)) {
            next = std::isinf(hi) ? 2.0 * x + 1.0 : (lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        }
        if (std::fabs(next - x) <= 4.0 * kEps * x) return next;
        x = next;
    }
    return x;
}

double t_quantile(double p, std::int64_t dof) { return StudentT(dof).quantile(p); }

double percentile_v(std::int64_t t, double alpha, std::int64_t dof) {
    if (t < 2) throw std::domain_error("percentile_v: round index must be >= 2, got " + std::to_string(t));
    if (!(alpha > 1.0)) throw std::domain_error("percentile_v: alpha must exceed 1");
    if (dof < 1) throw std::domain_error("percentile_v: degrees of freedom must be >= 1");

    struct Key {
        std::int64_t t;
        std::int64_t dof;
        std::uint64_t alpha_bits;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept {
            std::uint64_t h = static_cast<std::uint64_t>(k.t) * 0x9e3779b97f4a7c15ULL;
            h ^= static_cast<std::uint64_t>(k.dof) + 0x7f4a7c159e3779b9ULL + (h << 6) + (h >> 2);
            h ^= k.alpha_bits + (h << 6) + (h >> 2);
            return static_cast<std::size_t>(h);
        }
    };
    thread_local std::unordered_map<Key, double, KeyHash> memo;

    const Key key{t, dof, std::bit_cast<std::uint64_t>(alpha)};
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    if (memo.size() > (std::size_t{1} << 22)) memo.clear();

    const double q = std::exp(-alpha * std::log(static_cast<double>(t)));
    const double value = StudentT(dof).upper_quantile(q);
    memo.emplace(key, value);
    return value;
}

} // namespace cvbandit
