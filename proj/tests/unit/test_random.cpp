#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cvbandit/random.hpp"

using namespace cvbandit;

TEST_SUITE("random") {

TEST_CASE("equal seeds replay the same 10^4 draws") {
    RandomSource a(12345), b(12345);
    for (int i = 0; i < 10'000; ++i) REQUIRE(a.next_u64() == b.next_u64());
    RandomSource c(7), d(7);
    for (int i = 0; i < 10'000; ++i) REQUIRE(c.normal() == d.normal());
}

TEST_CASE("different seeds and derived streams diverge") {
    RandomSource a(1), b(2);
    CHECK(a.next_u64() != b.next_u64());
    const RandomSource root(99);
    RandomSource s1 = root.derive(1), s2 = root.derive(2), s1b = root.derive(1);
    const auto x1 = s1.next_u64();
    CHECK(x1 != s2.next_u64());
    CHECK(x1 == s1b.next_u64());
}

TEST_CASE("derive does not advance the parent") {
    RandomSource a(5), b(5);
    (void)a.derive(3);
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform ranges") {
    RandomSource rng(3);
    for (int i = 0; i < 100'000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double v = rng.uniform_open();
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
    }
}

TEST_CASE("standard normal moments") {
    RandomSource rng(11);
    const int n = 1'000'000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    CHECK(std::fabs(s1 / n) < 0.005);
    CHECK(std::fabs(s2 / n - 1.0) < 0.005);
    CHECK(std::fabs(s4 / n - 3.0) < 0.05);
}

TEST_CASE("bivariate gaussian: rho = 0 gives zero covariance") {
    RandomSource rng(21);
    const BivariateGaussianSpec spec{0, 0, 1, 1, 0.0};
    const int n = 1'000'000;
    double sxy = 0, sx = 0, sy = 0;
    for (int i = 0; i < n; ++i) {
        const auto [x, w] = sample_bivariate_gaussian(spec, rng);
        sx += x;
        sy += w;
        sxy += x * w;
    }
    CHECK(std::fabs(sxy / n - (sx / n) * (sy / n)) < 0.005);
}

TEST_CASE("bivariate gaussian: rho = 1 copies the reward") {
    RandomSource rng(22);
    const BivariateGaussianSpec spec{0, 0, 1, 1, 1.0};
    for (int i = 0; i < 1000; ++i) {
        const auto [x, w] = sample_bivariate_gaussian(spec, rng);
        REQUIRE(w == x);
    }
}

TEST_CASE("bivariate gaussian: moments at rho = 0.8, means (5, 2), stds (2, 1)") {
    RandomSource rng(23);
    const BivariateGaussianSpec spec{5, 2, 2, 1, 0.8};
    const int n = 1'000'000;
    double mx = 0, mw = 0, sxx = 0, sww = 0, sxw = 0;
    for (int k = 1; k <= n; ++k) {
        const auto [x, w] = sample_bivariate_gaussian(spec, rng);
        const double dx = x - mx, dw = w - mw;
        mx += dx / k;
        mw += dw / k;
        sxx += dx * (x - mx);
        sww += dw * (w - mw);
        sxw += dx * (w - mw);
    }
    const double sdx = std::sqrt(sxx / (n - 1)), sdw = std::sqrt(sww / (n - 1));
    const double rho = sxw / std::sqrt(sxx * sww);
    CHECK(mx == doctest::Approx(5.0).epsilon(0.005));
    CHECK(mw == doctest::Approx(2.0).epsilon(0.005));
    CHECK(sdx == doctest::Approx(2.0).epsilon(0.005));
    CHECK(sdw == doctest::Approx(1.0).epsilon(0.005));
    CHECK(rho == doctest::Approx(0.8).epsilon(0.005));
}

TEST_CASE("bivariate spec validation") {
    CHECK_THROWS_AS((BivariateGaussianSpec{0, 0, -1, 1, 0}.validate()), std::domain_error);
    CHECK_THROWS_AS((BivariateGaussianSpec{0, 0, 1, 1, 1.5}.validate()), std::domain_error);
    CHECK_NOTHROW((BivariateGaussianSpec{0, 0, 0, 0, -1}.validate()));
}

}
