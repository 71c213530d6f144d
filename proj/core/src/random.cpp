#include "cvbandit/random.hpp"

#include <cmath>
#include <stdexcept>

namespace cvbandit {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

} // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) {
        word = splitmix64(s);
        s += 0x9e3779b97f4a7c15ULL;
    }
    // xoshiro must not start from the all-zero state
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t RandomSource::next_u64() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RandomSource::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomSource::uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

double RandomSource::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

RandomSource RandomSource::derive(std::uint64_t stream) const {
    return RandomSource(splitmix64(seed_ ^ splitmix64(stream ^ 0x6a09e667f3bcc909ULL)));
}

void BivariateGaussianSpec::validate() const {
    if (!(std_x >= 0.0) || !(std_w >= 0.0))
        throw std::domain_error("bivariate gaussian: standard deviations must be >= 0");
    if (!(rho >= -1.0 && rho <= 1.0))
        throw std::domain_error("bivariate gaussian: rho must lie in [-1, 1]");
    if (!std::isfinite(mean_x) || !std::isfinite(mean_w))
        throw std::domain_error("bivariate gaussian: means must be finite");
}

std::pair<double, double> sample_bivariate_gaussian(const BivariateGaussianSpec& spec,
                                                    RandomSource& rng) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double x = spec.mean_x + spec.std_x * z1;
    // rho = +-1 must reproduce z1 exactly, so skip the second term there
    const double mix = (spec.rho == 1.0 || spec.rho == -1.0)
                           ? spec.rho * z1
                           : spec.rho * z1 + std::sqrt(1.0 - spec.rho * spec.rho) * z2;
    return {x, spec.mean_w + spec.std_w * mix};
}

} // namespace cvbandit
