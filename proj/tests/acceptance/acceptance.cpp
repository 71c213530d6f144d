// Acceptance runner: one line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "cvbandit/cv_estimation.hpp"
#include "cvbandit/environments.hpp"
#include "cvbandit/harness.hpp"
#include "cvbandit/policies.hpp"
#include "cvbandit/random.hpp"
#include "cvbandit/selftest.hpp"
#include "cvbandit/stats.hpp"

using namespace cvbandit;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

int failures = 0;

void criterion(int id, const char* title, double limit_seconds, const std::function<void(Outcome&)>& body) {
    Outcome out;
    const auto start = Clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (limit_seconds > 0) out.require(secs < limit_seconds, fmt("runtime %.1fs over %.0fs", secs, limit_seconds));
    failures += out.passed ? 0 : 1;
    std::printf("[%s] criterion %d: %s (%.2fs) %s\n", out.passed ? "PASS" : "FAIL", id, title, secs,
                out.detail.c_str());
    std::fflush(stdout);
}

bool rel_eq(double a, double b, double tol = 1e-12) {
    return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b));
}

PolicySpec spec_of(PolicyKind kind) {
    PolicySpec s;
    s.kind = kind;
    return s;
}

ExperimentConfig suite_config(std::vector<ArmModel> arms, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.horizon = 5000;
    cfg.runs = 200;
    cfg.base_seed = seed;
    cfg.arms = std::move(arms);
    for (auto kind : {PolicyKind::ucbwsi, PolicyKind::ucbwsi_split, PolicyKind::ucb1_normal, PolicyKind::ucbv})
        cfg.policies.push_back(spec_of(kind));
    return cfg;
}

double final_mean(const BatchResult& b, const std::string& policy) {
    for (const auto& p : b.policies)
        if (p.policy == policy) {
            double s = 0;
            for (double r : p.final_regret) s += r;
            return s / static_cast<double>(p.final_regret.size());
        }
    throw std::runtime_error("no policy " + policy);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 2-dof Student-t quantile in closed form.
double t2_quantile(double p) {
    const double a = 2.0 * p - 1.0;
    return a * std::sqrt(2.0 / (1.0 - a * a));
}

} // namespace

int main() {
    const RandomSource root(0xacce97ULL);
    constexpr std::size_t kReps = 100'000;

    criterion(1, "known-coefficient variance law within 3%", 60, [&](Outcome& out) {
        std::uint64_t stream = 100;
        for (double rho : {0.0, 0.5, 0.9})
            for (std::size_t s : {5u, 20u}) {
                const auto st = study_estimators(rho, s, kReps, root.derive(++stream));
                const double expected = (1.0 - rho * rho) * st.sigma2 / static_cast<double>(s);
                const double rel = st.var_known_beta / expected - 1.0;
                out.note(fmt("rho=%.1f s=%zu rel=%+.4f", rho, s, rel));
                out.require(std::fabs(rel) <= 0.03, fmt("rho=%.1f s=%zu", rho, s));
            }
    });

    criterion(2, "estimated-coefficient inflation (s-2)/(s-3)(1-rho^2) within 5%", 120, [&](Outcome& out) {
        std::uint64_t stream = 200;
        for (double rho : {0.5, 0.9})
            for (std::size_t s : {5u, 10u, 40u}) {
                const auto st = study_estimators(rho, s, kReps, root.derive(++stream));
                const double sd = static_cast<double>(s);
                const double expected = (sd - 2.0) / (sd - 3.0) * (1.0 - rho * rho);
                const double rel = (st.var_cv / st.var_plain) / expected - 1.0;
                out.note(fmt("rho=%.1f s=%zu rel=%+.4f", rho, s, rel));
                out.require(std::fabs(rel) <= 0.05, fmt("rho=%.1f s=%zu", rho, s));
            }
    });

    criterion(3, "variance estimate unbiased within 3 standard errors (s=10, rho=0.8)", 0, [&](Outcome& out) {
        const auto st = study_estimators(0.8, 10, kReps, root.derive(300));
        const double target = cv_estimate_variance(0.8, st.sigma2, 10);
        const double z = (st.mean_nu - target) / st.se_nu;
        out.note(fmt("E[nu]=%.6g Var=%.6g z=%+.2f", st.mean_nu, target, z));
        out.require(std::fabs(z) <= 3.0, "default formula");

        // The literal inverse-correction form under the same oracle, recorded only.
        RandomSource rng = root.derive(301);
        const BivariateGaussianSpec spec{EstimatorStudy::mu, 0.5, 2.0, 1.5, 0.8};
        EstimatorOptions literal;
        literal.variance = VarianceFormula::inverse_correction;
        double m = 0, m2 = 0;
        for (std::size_t r = 0; r < kReps; ++r) {
            SampleBuffer buf(spec.mean_w);
            for (int j = 0; j < 10; ++j) {
                const auto [x, w] = sample_bivariate_gaussian(spec, rng);
                buf.push(x, w);
            }
            const double v = cv_variance_estimate(buf, literal);
            m += v;
            m2 += v * v;
        }
        m /= kReps;
        const double se = std::sqrt((m2 / kReps - m * m) / kReps);
        out.note(fmt("literal form E[nu]=%.6g z=%+.1f (%s)", m, (m - target) / se,
                     std::fabs(m - target) <= 3 * se ? "unbiased" : "biased, as expected"));
    });

    criterion(4, "coverage P(|mu_c - mu| >= radius) <= 1.5e-3 (s=20, t=50)", 0, [&](Outcome& out) {
        const auto st = study_estimators(0.8, 20, kReps, root.derive(400), {}, 50);
        const double rate = static_cast<double>(st.exceedances) / static_cast<double>(kReps);
        out.note(fmt("rate=%.3g nominal=%.3g", rate, 2.0 / 2500.0));
        out.require(rate <= 1.5e-3, "exceedance rate");
    });

    criterion(5, "percentile_v(T, 2, T-2) <= 3.726 ln T for T in {100, 1000, 5000}", 1, [&](Outcome& out) {
        for (std::int64_t T : {100, 1000, 5000}) {
            const double v = percentile_v(T, 2.0, T - 2);
            const double limit = 3.726 * std::log(static_cast<double>(T));
            out.note(fmt("T=%lld V=%.4f V^2=%.3f limit=%.3f", static_cast<long long>(T), v, v * v, limit));
            out.require(v <= limit, fmt("T=%lld", static_cast<long long>(T)));
        }
    });

    // Criteria 6 and 7 share the 200-run batches.
    BatchResult gaussian_batch, sinr_batch;
    double gaussian_secs = 0.0;
    {
        const auto start = Clock::now();
        gaussian_batch = run_batch(suite_config(suites::gaussian(0.8), 6001), {});
        gaussian_secs = std::chrono::duration<double>(Clock::now() - start).count();
        sinr_batch = run_batch(suite_config(suites::sinr(), 6002), {});
    }

    criterion(6, "UCBwSI mean regret below the regret bound (Gaussian suite, rho=0.8, T=5000, 200 runs)", 0,
              [&](Outcome& out) {
                  const double regret = final_mean(gaussian_batch, "UCBwSI");
                  const double bound = theoretical_regret_bound(bound_params(gaussian_batch.truth, 1.5), 5000);
                  out.note(fmt("regret=%.2f bound=%.2f batch=%.1fs", regret, bound, gaussian_secs));
                  out.require(regret <= bound, "dominance");
                  out.require(gaussian_secs < 600.0, "runtime");
              });

    criterion(7, "ordering: UCBwSI >= 30% below UCB-V and UCB1-Normal; Split within 10% (Gaussian)", 0,
              [&](Outcome& out) {
                  for (const auto* b : {&gaussian_batch, &sinr_batch}) {
                      const char* name = b == &gaussian_batch ? "gaussian" : "sinr";
                      const double w = final_mean(*b, "UCBwSI");
                      const double v = final_mean(*b, "UCB-V");
                      const double n = final_mean(*b, "UCB1-Normal");
                      const double s = final_mean(*b, "UCBwSI-Split");
                      double min_abs_rho = 1.0;
                      for (double r : b->truth.rhos) min_abs_rho = std::min(min_abs_rho, std::fabs(r));
                      out.note(fmt("%s: UCBwSI=%.1f Split=%.1f UCB-V=%.1f UCB1-Normal=%.1f min|rho|=%.2f", name, w,
                                   s, v, n, min_abs_rho));
                      out.require(w < 0.7 * v, std::string(name) + " vs UCB-V");
                      out.require(w < 0.7 * n, std::string(name) + " vs UCB1-Normal");
                      if (b == &gaussian_batch)
                          out.require(std::fabs(s / w - 1.0) <= 0.10, "split within 10%");
                  }
              });

    criterion(8, "hand-arithmetic vectors at 1e-12 relative", 1, [&](Outcome& out) {
        const EstimatorOptions known{BetaCentering::known_mean, VarianceFormula::regression, true};
        auto eq = [&](double got, double want, const char* what) {
            out.require(rel_eq(got, want), fmt("%s: got %.17g want %.17g", what, got, want));
        };
        eq(optimal_beta(1.6, 4.0), 0.4, "optimal_beta");
        eq(transform_sample(1, 1, 2, 0.5), 1.5, "transform_sample");
        eq(beta_hat(SampleBuffer({1, 2, 3}, {1, 2, 3}, 2), BetaCentering::known_mean), 1.0, "beta_hat +1");
        eq(beta_hat(SampleBuffer({1, 2, 3}, {3, 2, 1}, 2), BetaCentering::known_mean), -1.0, "beta_hat -1");
        eq(beta_hat(SampleBuffer({1, 2, 3}, {1, 2, 3}, 3), BetaCentering::known_mean), 0.4, "beta_hat 0.4");
        eq(cv_point_estimate(SampleBuffer({1, 2, 3}, {1, 2, 3}, 2)), 2.0, "mu_c 2.0");
        eq(cv_point_estimate(SampleBuffer({1, 2, 3}, {1, 2, 3}, 3), BetaCentering::known_mean), 2.4, "mu_c 2.4");
        const SampleBuffer hand({1, 2, 3, 4}, {1, 2, 4, 3}, 2.5);
        eq(beta_hat(hand), 0.8, "hand beta");
        eq(cv_variance_estimate(hand), 0.225, "nu 0.225");
        out.require(cv_variance_estimate(SampleBuffer({1, 2, 3, 4}, {1, 2, 3, 4}, 2.5)) == 0.0, "nu 0");
        const double v100 = t2_quantile(1.0 - 1e-4);
        eq(percentile_v(100, 2.0, 2), v100, "V(100,2,2)");
        out.require(std::fabs(v100 - 70.70) < 0.05, "V(100,2,2) ~ 70.70");
        eq(confidence_radius(hand, 100, 2.0), v100 * std::sqrt(0.225), "radius");
        out.require(std::fabs(v100 * std::sqrt(0.225) - 33.54) < 0.01, "radius ~ 33.54");
        const boost::math::students_t t3(3.0);
        eq(t_quantile(0.99, 3), boost::math::quantile(t3, 0.99), "t_quantile(0.99, 3)");
        out.require(std::fabs(t_quantile(0.99, 3) - 4.5407) < 5e-5, "4.5407");
        eq(percentile_v(10, 2.0, 3), t_quantile(0.99, 3), "V(10,2,3)");

        const SampleBuffer three({1, 2, 3}, {1, 2, 3}, 2);
        const auto split = split_transformed_samples(three, BetaCentering::known_mean);
        eq(split[0], 1.5, "split[0]");
        eq(split[1], 2.0, "split[1]");
        eq(split[2], 2.5, "split[2]");
        const auto se = split_estimate(three, BetaCentering::known_mean);
        eq(se.mean, 2.0, "split mean");
        eq(se.variance, 0.5 / 6.0, "split variance");

        const ArmState hand_arm{hand};
        eq(ucbwsi_index(hand_arm, 100, 2.0), 2.5 + v100 * std::sqrt(0.225), "UCBwSI index");
        out.require(std::fabs(ucbwsi_index(hand_arm, 100, 2.0) - 36.04) < 0.01, "UCBwSI index ~ 36.04");
        const double split_idx = ucbwsi_split_index(ArmState{three}, 10, 2.0, known);
        eq(split_idx, 2.0 + t2_quantile(0.99) * std::sqrt(0.5 / 6.0), "split index");
        out.require(std::fabs(split_idx - 4.011) < 1e-3, "split index ~ 4.011");
        const ArmState two{SampleBuffer({0, 2}, {0, 0}, 0)};
        eq(ucb1_normal_index(two, 10), 1.0 + std::sqrt(16.0 * std::log(9.0)), "UCB1-Normal index");
        eq(ucbv_index_log(two, 2.0, 1.0, 1.0), 1.0 + std::sqrt(2.0) + 3.0, "UCB-V index");

        const double pi2_3 = std::numbers::pi * std::numbers::pi / 3.0;
        BoundParams p;
        p.deltas = {1.0};
        p.rhos = {1.0};
        p.sigmas2 = {1.0};
        eq(theoretical_regret_bound(p, 5000), 8.0 * (pi2_3 + 1.0), "bound rho=1");
        p.rhos = {0.8};
        eq(regret_bound_with_v(p, 3.0), 8.0 * (9.0 * 1.5 * 0.36 + pi2_3 + 1.0), "bound V=3");

        RegretTrace trace;
        trace.records = {{1, 0, 5, 5}, {2, 1, 3, 8}, {3, 0, 5, 13}};
        out.require(empirical_regret(trace, 5.0) == std::vector<double>{0, 2, 2}, "regret (0,2,2)");

        eq(shannon_rate(10.0), std::log2(11.0), "shannon(10)");
        SinrArm det;
        det.power = 10.0;
        det.gain = Distribution::constant(1.0);
        RandomSource rng(1);
        eq(draw(det, rng).reward, std::log2(11.0), "deterministic SINR pull");
        out.note(out.passed ? "all vectors match" : "");
    });

    criterion(9, "multi-SI coefficient equals an independent least-squares fit to 1e-9", 0, [&](Outcome& out) {
        RandomSource rng = root.derive(900);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const int s = 50, q = 3;
            std::vector<double> omegas{rng.normal(), rng.normal(), rng.normal()};
            MultiSampleBuffer buf(omegas);
            Eigen::MatrixXd design(s, q + 1);
            Eigen::VectorXd y(s);
            const double b0 = rng.normal(), b1 = rng.normal(), b2 = rng.normal();
            for (int r = 0; r < s; ++r) {
                double row[3] = {omegas[0] + rng.normal(), omegas[1] + rng.normal(), omegas[2] + rng.normal()};
                const double x = 2.0 + b0 * row[0] + b1 * row[1] + b2 * row[2] + rng.normal();
                buf.push(x, row);
                design(r, 0) = 1.0;
                for (int j = 0; j < q; ++j) design(r, j + 1) = row[j];
                y(r) = x;
            }
            const Eigen::VectorXd coef = design.householderQr().solve(y);
            const auto beta = multi_beta_hat(buf);
            for (int j = 0; j < q; ++j) {
                const double rel = std::fabs(beta[j] - coef(j + 1)) / std::max(1e-300, std::fabs(coef(j + 1)));
                worst = std::max(worst, rel);
            }
        }
        out.note(fmt("worst relative error %.3g", worst));
        out.require(worst <= 1e-9, "oracle agreement");
    });

    criterion(10, "byte-identical CSV output for 1 and 4 workers", 0, [&](Outcome& out) {
        const auto base = std::filesystem::temp_directory_path() / "cvbandit_acceptance_determinism";
        std::size_t compared = 0;
        for (int suite = 0; suite < 2; ++suite) {
            ExperimentConfig cfg = suite_config(suite == 0 ? suites::gaussian(0.8) : suites::sinr(), 77 + suite);
            cfg.horizon = 1000;
            cfg.runs = 6;
            const auto d1 = base / ("w1_" + std::to_string(suite));
            const auto d4 = base / ("w4_" + std::to_string(suite));
            std::filesystem::remove_all(d1);
            std::filesystem::remove_all(d4);
            BatchOptions o1, o4;
            o1.output_dir = d1;
            o4.output_dir = d4;
            o4.workers = 4;
            run_batch(cfg, o1);
            run_batch(cfg, o4);
            for (const auto& entry : std::filesystem::recursive_directory_iterator(d1)) {
                if (!entry.is_regular_file()) continue;
                const auto other = d4 / std::filesystem::relative(entry.path(), d1);
                out.require(std::filesystem::exists(other) && slurp(entry.path()) == slurp(other),
                            entry.path().filename().string());
                ++compared;
            }
        }
        std::filesystem::remove_all(base);
        out.note(fmt("%zu files compared", compared));
        out.require(compared == 2 * (2 + 4 * 6), "file count");
    });

    std::printf("%d criterion failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
