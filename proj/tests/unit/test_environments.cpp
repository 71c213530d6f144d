#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cvbandit/environments.hpp"
#include "cvbandit/random.hpp"

using namespace cvbandit;

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

SinrArm deterministic_sinr() {
    SinrArm arm;
    arm.power = 10.0;
    arm.noise = 1.0;
    arm.gain = Distribution::constant(1.0);
    arm.measured_interference = Distribution::constant(0.0);
    arm.hidden_interference = Distribution::constant(0.0);
    return arm;
}

GaussianArm gaussian_arm(double mu, double rho = 0.0) {
    return GaussianArm{BivariateGaussianSpec{mu, 0.0, 1.0, 1.0, rho}};
}

} // namespace

TEST_SUITE("environments") {

TEST_CASE("shannon rate") {
    CHECK(shannon_rate(0.0) == 0.0);
    CHECK(shannon_rate(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(shannon_rate(10.0) == doctest::Approx(std::log2(11.0)).epsilon(1e-15));
    CHECK(std::fabs(shannon_rate(10.0) - 3.4594) < 1e-4);
    CHECK_THROWS_AS(shannon_rate(-0.1), std::domain_error);
    CHECK_THROWS_AS(shannon_rate(NAN), std::domain_error);
}

TEST_CASE("deterministic SINR arm") {
    Environment env({deterministic_sinr(), gaussian_arm(0.0)}, RandomSource(1));
    for (int i = 0; i < 100; ++i) {
        const auto obs = env.pull(0);
        REQUIRE(obs.reward == doctest::Approx(std::log2(11.0)).epsilon(1e-15));
        REQUIRE(obs.side_info == 0.0);
    }
    const auto truth = true_means(env, 100'000);
    CHECK(truth.means[0] == doctest::Approx(std::log2(11.0)).epsilon(1e-14));
    CHECK(truth.stderrs[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("zero transmit power gives zero rate") {
    SinrArm arm = deterministic_sinr();
    arm.power = 0.0;
    arm.gain = Distribution::db_normal(0.0, 3.0);
    arm.measured_interference = Distribution::db_normal(0.0, 3.0);
    RandomSource rng(2);
    for (int i = 0; i < 1000; ++i) REQUIRE(draw(arm, rng).reward == 0.0);
}

TEST_CASE("SINR reward formula per side-information kind") {
    SinrArm arm;
    arm.power = 2.0;
    arm.noise = 0.5;
    arm.gain = Distribution::constant(3.0);
    arm.hidden_interference = Distribution::constant(0.25);
    arm.measured_interference = Distribution::constant(1.5);
    RandomSource rng(3);
    CHECK(draw(arm, rng).reward == doctest::Approx(std::log2(1 + 3.0 * 2.0 / (3.0 * 1.5 + 0.25 + 0.5))));
    arm.scale_interference_by_gain = false;
    CHECK(draw(arm, rng).reward == doctest::Approx(std::log2(1 + 3.0 * 2.0 / (1.5 + 0.25 + 0.5))));
    arm.si_kind = SideInfoKind::channel_gain;
    const auto obs = draw(arm, rng);
    CHECK(obs.reward == doctest::Approx(std::log2(1 + 3.0 * 2.0 / (0.25 + 0.5))));
    CHECK(obs.side_info == 3.0);
}

TEST_CASE("gaussian arm correlation") {
    Environment env({gaussian_arm(1.0, 0.8), gaussian_arm(0.0)}, RandomSource(4));
    const int n = 1'000'000;
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        const auto obs = env.pull(0);
        x[i] = obs.reward;
        w[i] = obs.side_info;
    }
    CHECK(std::fabs(correlation(x, w) - 0.8) < 0.01);
}

TEST_CASE("interference side-information is negatively correlated with the rate") {
    SinrArm arm;
    arm.gain = Distribution::db_normal(5.0, 2.0);
    arm.measured_interference = Distribution::db_normal(1.0, 2.0);
    arm.hidden_interference = Distribution::db_normal(-20.0, 2.0);
    for (bool scaled : {true, false}) {
        arm.scale_interference_by_gain = scaled;
        RandomSource rng(5);
        std::vector<double> x, w;
        for (int i = 0; i < 100'000; ++i) {
            const auto obs = draw(arm, rng);
            x.push_back(obs.reward);
            w.push_back(obs.side_info);
        }
        CHECK(correlation(x, w) < 0.0);
    }
}

TEST_CASE("channel-gain side-information is positively correlated with the rate") {
    SinrArm arm;
    arm.si_kind = SideInfoKind::channel_gain;
    arm.gain = Distribution::db_normal(5.0, 2.0);
    arm.hidden_interference = Distribution::db_normal(0.0, 2.0);
    RandomSource rng(6);
    std::vector<double> x, w;
    for (int i = 0; i < 100'000; ++i) {
        const auto obs = draw(arm, rng);
        x.push_back(obs.reward);
        w.push_back(obs.side_info);
    }
    CHECK(correlation(x, w) > 0.0);
}

TEST_CASE("pulls are independent across rounds") {
    Environment env(suites::sinr(), RandomSource(7));
    const int n = 1'000'000;
    std::vector<double> a(n - 1), b(n - 1);
    double prev = env.pull(2).reward;
    for (int i = 0; i < n - 1; ++i) {
        const double cur = env.pull(2).reward;
        a[i] = prev;
        b[i] = cur;
        prev = cur;
    }
    CHECK(std::fabs(correlation(a, b)) < 0.01);
}

TEST_CASE("same seed gives the same pull stream") {
    Environment e1(suites::sinr(), RandomSource(8)), e2(suites::sinr(), RandomSource(8));
    for (int i = 0; i < 1000; ++i) {
        const auto a = e1.pull(i % 8), b = e2.pull(i % 8);
        REQUIRE(a.reward == b.reward);
        REQUIRE(a.side_info == b.side_info);
    }
}

TEST_CASE("true means") {
    const auto truth = true_means({gaussian_arm(5), gaussian_arm(-1), gaussian_arm(3)}, 0, RandomSource(9));
    CHECK(truth.means == std::vector<double>{5, -1, 3});
    CHECK(truth.best == 0);
    CHECK(truth.mu_star == 5.0);
    const auto tie = true_means({gaussian_arm(2), gaussian_arm(2)}, 0, RandomSource(9));
    CHECK(tie.best == 0);
}

TEST_CASE("Monte-Carlo true means for general arms") {
    GeneralArm arm;
    arm.reward = Distribution::lognormal(0.2, 0.4);
    arm.side_info = Distribution::shifted_beta(2, 3, -1, 1);
    arm.copula_rho = 0.6;
    const auto truth = true_means({arm, gaussian_arm(0)}, 200'000, RandomSource(10));
    const double exact = std::exp(0.2 + 0.08);
    CHECK(std::fabs(truth.means[0] - exact) <= 4.0 * truth.stderrs[0]);
    CHECK(truth.stderrs[0] > 0.0);
    CHECK(truth.rhos[0] > 0.4);
}

TEST_CASE("side-information mean calibration") {
    SinrArm constant_si = deterministic_sinr();
    constant_si.measured_interference = Distribution::constant(0.7);
    const std::vector<ArmModel> arms{constant_si,
                                     GaussianArm{BivariateGaussianSpec{0.0, 2.0, 1.0, 1.0, 0.3}}};
    const auto est = calibrate_si_means(arms, 10'000, RandomSource(11));
    CHECK(est[0] == 0.7);
    CHECK(std::fabs(est[1] - 2.0) <= 0.03);
    CHECK_THROWS(calibrate_si_means(arms, 0, RandomSource(11)));
}

TEST_CASE("analytic side-information means") {
    CHECK(si_mean(gaussian_arm(1.0)) == 0.0);
    SinrArm s;
    s.measured_interference = Distribution::db_normal(3.0, 2.0);
    const double k = std::log(10.0) / 10.0;
    CHECK(si_mean(s) == doctest::Approx(std::exp(3.0 * k + 0.5 * (2.0 * k) * (2.0 * k))));
    s.si_mean = 1.25;
    CHECK(si_mean(s) == 1.25);
    RandomSource rng(12);
    const Distribution d = Distribution::db_normal(3.0, 2.0);
    double acc = 0;
    for (int i = 0; i < 400'000; ++i) acc += d.sample(rng);
    CHECK(acc / 400'000 == doctest::Approx(d.mean()).epsilon(0.005));
    const Distribution b = Distribution::shifted_beta(2, 3, 1, 3);
    CHECK(b.mean() == doctest::Approx(1 + 2 * 0.4));
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(Environment({gaussian_arm(0)}, RandomSource(1)), std::invalid_argument);
    SinrArm bad = deterministic_sinr();
    bad.noise = 0.0;
    CHECK_THROWS_AS(validate_arm(bad), std::domain_error);
    bad = deterministic_sinr();
    bad.gain = Distribution::normal(1.0, 1.0);
    CHECK_THROWS_AS(validate_arm(bad), std::domain_error);
    GeneralArm g;
    g.copula_rho = 1.5;
    CHECK_THROWS_AS(validate_arm(g), std::domain_error);
    Environment env({gaussian_arm(0), gaussian_arm(1)}, RandomSource(1));
    CHECK_THROWS_AS(env.pull(2), std::out_of_range);
}

TEST_CASE("built-in suites") {
    const auto g = suites::gaussian(0.8);
    REQUIRE(g.size() == 8);
    const auto truth = true_means(g, 0, RandomSource(1));
    CHECK(truth.best == 6);
    CHECK(truth.mu_star == doctest::Approx(1.8));
    for (double r : truth.rhos) CHECK(r == 0.8);
    const auto s = suites::sinr();
    REQUIRE(s.size() == 8);
    const auto st = true_means(s, 100'000, RandomSource(2));
    CHECK(st.best == 6);
    for (double r : st.rhos) CHECK(r < 0.0);
}

}
