#include "cvbandit/cv_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cvbandit/errors.hpp"
#include "cvbandit/stats.hpp"

namespace cvbandit {

namespace {

void require_samples(std::size_t s, std::size_t needed, const char* what) {
    if (s < needed)
        throw InsufficientSamples(std::string(what) + ": need at least " + std::to_string(needed) +
                                  " samples, have " + std::to_string(s));
}

struct Moments {
    double mean_x;
    double mean_w;
    double sxx;  // sum (x - mean_x)^2
    double sww;  // sum (w - mean_w)^2
    double sxw;  // sum (x - mean_x)(w - mean_w)
};

Moments centered_moments(const SampleBuffer& buf) {
    Moments m{buf.mean_x(), buf.mean_w(), 0.0, 0.0, 0.0};
    const auto xs = buf.xs();
    const auto ws = buf.ws();
    for (std::size_t r = 0; r < xs.size(); ++r) {
        const double dx = xs[r] - m.mean_x;
        const double dw = ws[r] - m.mean_w;
        m.sxx += dx * dx;
        m.sww += dw * dw;
        m.sxw += dx * dw;
    }
    return m;
}

// Numerator and denominator of the coefficient for the chosen centering.
std::pair<double, double> beta_terms(const SampleBuffer& buf, const Moments& m,
                                     BetaCentering centering) {
    if (centering == BetaCentering::sample_mean) return {m.sxw, m.sww};
    // Centering W at omega: sum (x - mean_x)(w - omega) equals sxw because
    // the x deviations sum to zero.
    const double shift = m.mean_w - buf.omega();
    const double s = static_cast<double>(buf.size());
    return {m.sxw, m.sww + s * shift * shift};
}

double checked_beta(const SampleBuffer& buf, const Moments& m, BetaCentering centering) {
    const auto [num, den] = beta_terms(buf, m, centering);
    if (!(den > degenerate_threshold(buf.size(), buf.omega())))
        throw DegenerateSideInfo("side-information has no spread around its centering point");
    return num / den;
}

double residual_sum_squares(const SampleBuffer& buf, const Moments& m, double beta) {
    // X_r + beta (omega - W_r) - cv_mean = (X_r - mean_x) - beta (W_r - mean_w)
    const auto xs = buf.xs();
    const auto ws = buf.ws();
    double rss = 0.0;
    for (std::size_t r = 0; r < xs.size(); ++r) {
        const double e = (xs[r] - m.mean_x) - beta * (ws[r] - m.mean_w);
        rss += e * e;
    }
    return rss;
}

double variance_from_parts(const SampleBuffer& buf, const Moments& m, double beta,
                           VarianceFormula formula) {
    const double s = static_cast<double>(buf.size());
    if (!(m.sww > degenerate_threshold(buf.size(), buf.omega())))
        throw DegenerateSideInfo("side-information has zero sample variance");
    const double s2 = residual_sum_squares(buf, m, beta) / (s - 2.0);
    const double shift = m.mean_w - buf.omega();
    if (formula == VarianceFormula::regression)
        return s2 * (1.0 / s + shift * shift / m.sww);
    // (sum (W - omega))^2 / s^2 = shift^2
    return s2 / (1.0 / s - shift * shift / m.sww);
}

} // namespace

SampleBuffer::SampleBuffer(std::vector<double> xs, std::vector<double> ws, double omega)
    : omega_(omega) {
    if (xs.size() != ws.size())
        throw std::invalid_argument("SampleBuffer: rewards and side-information differ in length");
    xs_.reserve(xs.size());
    ws_.reserve(ws.size());
    for (std::size_t i = 0; i < xs.size(); ++i) push(xs[i], ws[i]);
}

void SampleBuffer::push(double x, double w) {
    xs_.push_back(x);
    ws_.push_back(w);
    sum_x_ += x;
    sum_w_ += w;
}

double SampleBuffer::mean_x() const {
    require_samples(size(), 1, "mean_x");
    return sum_x_ / static_cast<double>(size());
}

double SampleBuffer::mean_w() const {
    require_samples(size(), 1, "mean_w");
    return sum_w_ / static_cast<double>(size());
}

double degenerate_threshold(std::size_t s, double omega) {
    return 1e-12 * std::max(1.0, static_cast<double>(s) * omega * omega);
}

double optimal_beta(double cov_xw, double var_w) {
    if (!(var_w > 0.0)) throw DegenerateSideInfo("optimal_beta: side-information variance must be positive");
    return cov_xw / var_w;
}

double beta_hat(const SampleBuffer& buf, BetaCentering centering) {
    require_samples(buf.size(), 2, "beta_hat");
    return checked_beta(buf, centered_moments(buf), centering);
}

double cv_point_estimate(const SampleBuffer& buf, BetaCentering centering) {
    require_samples(buf.size(), 2, "cv_point_estimate");
    const Moments m = centered_moments(buf);
    const double beta = checked_beta(buf, m, centering);
    return m.mean_x + beta * (buf.omega() - m.mean_w);
}

double cv_variance_estimate(const SampleBuffer& buf, const EstimatorOptions& options) {
    if (!options.use_side_info) return plain_estimate(buf).variance;
    require_samples(buf.size(), 4, "cv_variance_estimate");
    const Moments m = centered_moments(buf);
    const double beta = checked_beta(buf, m, options.centering);
    return variance_from_parts(buf, m, beta, options.variance);
}

double confidence_radius(const SampleBuffer& buf, std::int64_t t, double alpha,
                         const EstimatorOptions& options) {
    const double variance = cv_variance_estimate(buf, options);
    if (variance == 0.0) return 0.0;
    const auto dof = static_cast<std::int64_t>(buf.size()) - (options.use_side_info ? 2 : 1);
    return percentile_v(t, alpha, dof) * std::sqrt(std::max(variance, 0.0));
}

CvEstimate plain_estimate(const SampleBuffer& buf) {
    require_samples(buf.size(), 2, "plain_estimate");
    const double s = static_cast<double>(buf.size());
    const double mean = buf.mean_x();
    double sxx = 0.0;
    for (double x : buf.xs()) sxx += (x - mean) * (x - mean);
    return CvEstimate{mean, sxx / (s - 1.0) / s, 0.0, buf.size(),
                      static_cast<std::int64_t>(buf.size()) - 1, false};
}

CvEstimate estimate(const SampleBuffer& buf, const EstimatorOptions& options) {
    if (!options.use_side_info) return plain_estimate(buf);
    require_samples(buf.size(), 4, "estimate");
    const Moments m = centered_moments(buf);
    const auto [num, den] = beta_terms(buf, m, options.centering);
    const double eps = degenerate_threshold(buf.size(), buf.omega());
    if (!(den > eps) || !(m.sww > eps)) return plain_estimate(buf);

    const double beta = num / den;
    CvEstimate out;
    out.mean = m.mean_x + beta * (buf.omega() - m.mean_w);
    out.variance = std::max(0.0, variance_from_parts(buf, m, beta, options.variance));
    if (!std::isfinite(out.variance)) out.variance = 0.0;
    out.beta = beta;
    out.n = buf.size();
    out.dof = static_cast<std::int64_t>(buf.size()) - 2;
    out.side_info_used = true;
    return out;
}

std::vector<double> split_transformed_samples(const SampleBuffer& buf, BetaCentering centering) {
    const std::size_t n = buf.size();
    require_samples(n, 3, "split_transformed_samples");
    const double s = static_cast<double>(n);
    const double omega = buf.omega();
    const double mean_x = buf.mean_x();
    const double mean_w = buf.mean_w();
    const auto xs = buf.xs();
    const auto ws = buf.ws();
    const double eps = degenerate_threshold(n - 1, omega);

    // Totals over the full buffer; each leave-one-out group subtracts pair j.
    double sxw = 0.0, sww = 0.0;  // centered at mean_w
    double sxd = 0.0, sdd = 0.0, sd = 0.0;  // d = w - omega
    for (std::size_t r = 0; r < n; ++r) {
        const double dx = xs[r] - mean_x;
        const double dw = ws[r] - mean_w;
        const double d = ws[r] - omega;
        sxw += dx * dw;
        sww += dw * dw;
        sxd += dx * d;
        sdd += d * d;
        sd += d;
    }

    std::vector<double> out(n);
    const double ratio = s / (s - 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double dx = xs[j] - mean_x;
        double num, den;
        if (centering == BetaCentering::sample_mean) {
            const double dw = ws[j] - mean_w;
            num = sxw - dx * dw * ratio;
            den = sww - dw * dw * ratio;
        } else {
            const double d = ws[j] - omega;
            num = (sxd - dx * d) + dx / (s - 1.0) * (sd - d);
            den = sdd - d * d;
        }
        if (!(den > eps))
            throw DegenerateSideInfo("split: leave-one-out group " + std::to_string(j) +
                                     " has no side-information spread");
        out[j] = transform_sample(xs[j], ws[j], omega, num / den);
    }
    return out;
}

SplitEstimate split_estimate(const SampleBuffer& buf, BetaCentering centering) {
    const auto samples = split_transformed_samples(buf, centering);
    const double s = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double v : samples) sum += v;
    const double mean = sum / s;
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    return {mean, ss / (s * (s - 1.0))};
}

// ---------------------------------------------------------------------------

MultiSampleBuffer::MultiSampleBuffer(std::vector<double> omegas) : omegas_(std::move(omegas)) {
    if (omegas_.empty()) throw std::invalid_argument("MultiSampleBuffer: need at least one side-information");
}

void MultiSampleBuffer::push(double x, std::span<const double> w) {
    if (w.size() != q())
        throw std::invalid_argument("MultiSampleBuffer: row has " + std::to_string(w.size()) +
                                    " side-informations, expected " + std::to_string(q()));
    xs_.push_back(x);
    ws_.insert(ws_.end(), w.begin(), w.end());
}

std::span<const double> MultiSampleBuffer::w_row(std::size_t r) const {
    return std::span<const double>(ws_).subspan(r * q(), q());
}

std::vector<double> solve_pivoted(std::vector<double> a, std::vector<double> b, double cutoff) {
    const std::size_t n = b.size();
    if (a.size() != n * n) throw std::invalid_argument("solve_pivoted: shape mismatch");
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::fabs(v));
    if (!(scale > 0.0)) throw SingularSideInfo("side-information system matrix is zero");

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
        if (!(std::fabs(a[pivot * n + col]) > cutoff * scale))
            throw SingularSideInfo("side-information system matrix is numerically singular");
        if (pivot != col) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t k = i + 1; k < n; ++k) acc -= a[i * n + k] * x[k];
        x[i] = acc / a[i * n + i];
    }
    return x;
}

namespace {

struct MultiMoments {
    double mean_x = 0.0;
    std::vector<double> mean_w;
    std::vector<double> sww;  // q x q centered cross-products
    std::vector<double> swx;  // q centered cross-products with x
};

MultiMoments multi_moments(const MultiSampleBuffer& buf) {
    const std::size_t s = buf.size();
    const std::size_t q = buf.q();
    MultiMoments m;
    m.mean_w.assign(q, 0.0);
    for (std::size_t r = 0; r < s; ++r) {
        m.mean_x += buf.xs()[r];
        for (std::size_t j = 0; j < q; ++j) m.mean_w[j] += buf.w(r, j);
    }
    m.mean_x /= static_cast<double>(s);
    for (double& v : m.mean_w) v /= static_cast<double>(s);

    m.sww.assign(q * q, 0.0);
    m.swx.assign(q, 0.0);
    std::vector<double> dw(q);
    for (std::size_t r = 0; r < s; ++r) {
        const double dx = buf.xs()[r] - m.mean_x;
        for (std::size_t j = 0; j < q; ++j) dw[j] = buf.w(r, j) - m.mean_w[j];
        for (std::size_t j = 0; j < q; ++j) {
            m.swx[j] += dw[j] * dx;
            for (std::size_t k = 0; k < q; ++k) m.sww[j * q + k] += dw[j] * dw[k];
        }
    }
    return m;
}

} // namespace

std::vector<double> multi_beta_hat(const MultiSampleBuffer& buf) {
    require_samples(buf.size(), buf.q() + 2, "multi_beta_hat");
    // W'W - s w_hat w_hat' and W'X - s w_hat mu_hat are the centered
    // cross-product sums; accumulate them centered directly.
    MultiMoments m = multi_moments(buf);
    return solve_pivoted(std::move(m.sww), std::move(m.swx));
}

double multi_cv_point_estimate(const MultiSampleBuffer& buf) {
    const auto beta = multi_beta_hat(buf);
    const MultiMoments m = multi_moments(buf);
    double out = m.mean_x;
    for (std::size_t j = 0; j < buf.q(); ++j) out += beta[j] * (buf.omegas()[j] - m.mean_w[j]);
    return out;
}

double multi_cv_variance_estimate(const MultiSampleBuffer& buf) {
    const std::size_t q = buf.q();
    require_samples(buf.size(), q + 3, "multi_cv_variance_estimate");
    const MultiMoments m = multi_moments(buf);
    const auto beta = solve_pivoted(m.sww, m.swx);
    const double s = static_cast<double>(buf.size());

    double rss = 0.0;
    for (std::size_t r = 0; r < buf.size(); ++r) {
        double e = buf.xs()[r] - m.mean_x;
        for (std::size_t j = 0; j < q; ++j) e -= beta[j] * (buf.w(r, j) - m.mean_w[j]);
        rss += e * e;
    }
    const double s2 = rss / (s - static_cast<double>(q) - 1.0);

    std::vector<double> d(q);
    for (std::size_t j = 0; j < q; ++j) d[j] = m.mean_w[j] - buf.omegas()[j];
    const auto y = solve_pivoted(m.sww, d);
    double quad = 0.0;
    for (std::size_t j = 0; j < q; ++j) quad += d[j] * y[j];
    return s2 * (1.0 / s + quad);
}

} // namespace cvbandit
