#include "cvbandit/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <span>

#include "cvbandit/stats.hpp"

namespace cvbandit {

namespace {

// Welford accumulator.
struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

std::string fmt(const char* pattern, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

} // namespace

double cv_estimate_variance(double rho, double sigma2, std::size_t s) {
    const double sd = static_cast<double>(s);
    return (sd - 2.0) / (sd - 3.0) * (1.0 - rho * rho) * sigma2 / sd;
}

EstimatorStudy study_estimators(double rho, std::size_t s, std::size_t replications,
                                RandomSource rng, const EstimatorOptions& options,
                                std::int64_t coverage_t) {
    const BivariateGaussianSpec spec{EstimatorStudy::mu, 0.5, 2.0, 1.5, rho};
    const double beta_star = rho * spec.std_x / spec.std_w;
    const double v = percentile_v(coverage_t, 2.0, static_cast<std::int64_t>(s) - 2);

    Moments plain, known, cv, nu;
    std::size_t exceed = 0;
    std::vector<double> xs(s), ws(s);
    for (std::size_t r = 0; r < replications; ++r) {
        double known_sum = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            const auto [x, w] = sample_bivariate_gaussian(spec, rng);
            xs[j] = x;
            ws[j] = w;
            known_sum += transform_sample(x, w, spec.mean_w, beta_star);
        }
        const SampleBuffer buf(xs, ws, spec.mean_w);
        plain.add(buf.mean_x());
        known.add(known_sum / static_cast<double>(s));
        const CvEstimate est = estimate(buf, options);
        cv.add(est.mean);
        nu.add(est.variance);
        if (std::fabs(est.mean - EstimatorStudy::mu) >= v * std::sqrt(std::max(est.variance, 0.0)))
            ++exceed;
    }

    EstimatorStudy out;
    out.rho = rho;
    out.s = s;
    out.replications = replications;
    out.sigma2 = spec.std_x * spec.std_x;
    out.var_plain = plain.variance();
    out.var_known_beta = known.variance();
    out.mean_cv = cv.mean;
    out.var_cv = cv.variance();
    out.mean_nu = nu.mean;
    out.se_nu = std::sqrt(nu.variance() / static_cast<double>(replications));
    out.exceedances = exceed;
    out.coverage_t = coverage_t;
    return out;
}

std::vector<SelftestCheck> run_selftest(const SelftestOptions& options) {
    std::vector<SelftestCheck> checks;
    const RandomSource root(options.seed);
    const std::size_t reps = options.replications;
    std::uint64_t stream = 0;

    for (double rho : {0.0, 0.5, 0.9}) {
        for (std::size_t s : {5u, 20u}) {
            const auto st = study_estimators(rho, s, reps, root.derive(++stream));
            const double expected = (1.0 - rho * rho) * st.sigma2 / static_cast<double>(s);
            const double rel = st.var_known_beta / expected - 1.0;
            checks.push_back({fmt("known-beta variance rho=%.1f s=%.0f", rho, static_cast<double>(s)),
                              std::fabs(rel) <= 0.03, fmt("relative error %.4f (tol %.2f)", rel, 0.03)});
        }
    }

    for (double rho : {0.5, 0.9}) {
        for (std::size_t s : {5u, 10u, 40u}) {
            const auto st = study_estimators(rho, s, reps, root.derive(++stream));
            const double sd = static_cast<double>(s);
            const double expected = (sd - 2.0) / (sd - 3.0) * (1.0 - rho * rho);
            const double rel = (st.var_cv / st.var_plain) / expected - 1.0;
            checks.push_back({fmt("estimated-beta inflation rho=%.1f s=%.0f", rho, sd),
                              std::fabs(rel) <= 0.05, fmt("relative error %.4f (tol %.2f)", rel, 0.05)});
        }
    }

    {
        const auto st = study_estimators(0.8, 10, reps, root.derive(++stream));
        const double target = cv_estimate_variance(0.8, st.sigma2, 10);
        const double z = (st.mean_nu - target) / st.se_nu;
        checks.push_back({"variance estimate unbiased rho=0.8 s=10", std::fabs(z) <= 3.0,
                          fmt("mean %.6g vs exact %.6g", st.mean_nu, target)});
        const double bias = (st.mean_cv - EstimatorStudy::mu) / std::sqrt(st.var_cv / static_cast<double>(reps));
        checks.push_back({"point estimate unbiased rho=0.8 s=10", std::fabs(bias) <= 4.0,
                          fmt("standardized bias %.3f (tol %.0f)", bias, 4.0)});
    }

    {
        const std::int64_t t = 50;
        const auto st = study_estimators(0.8, 20, reps, root.derive(++stream), {}, t);
        const double rate = static_cast<double>(st.exceedances) / static_cast<double>(reps);
        const double nominal = 2.0 / static_cast<double>(t * t);
        const double slack = 3.0 * std::sqrt(nominal / static_cast<double>(reps));
        checks.push_back({"confidence radius coverage s=20 t=50", rate <= nominal + slack,
                          fmt("exceedance rate %.3g (limit %.3g)", rate, nominal + slack)});
    }

    for (std::int64_t T : {100, 1000, 5000}) {
        const double v = percentile_v(T, 2.0, T - 2);
        const double limit = 3.726 * std::log(static_cast<double>(T));
        checks.push_back({"percentile bound T=" + std::to_string(T), v <= limit,
                          fmt("V = %.6g, 3.726 ln T = %.6g", v, limit)});
    }

    {
        RandomSource rng = root.derive(++stream);
        MultiSampleBuffer multi({0.5});
        SampleBuffer single(0.5);
        const BivariateGaussianSpec spec{1.0, 0.5, 2.0, 1.5, 0.7};
        for (int j = 0; j < 30; ++j) {
            const auto [x, w] = sample_bivariate_gaussian(spec, rng);
            const double row[1] = {w};
            multi.push(x, std::span<const double>(row, 1));
            single.push(x, w);
        }
        const double a = multi_beta_hat(multi).front();
        const double b = beta_hat(single);
        const double rel = std::fabs(a - b) / std::fabs(b);
        checks.push_back({"single side-information matrix form", rel <= 1e-10,
                          fmt("matrix %.17g vs scalar %.17g", a, b)});
    }

    return checks;
}

} // namespace cvbandit
