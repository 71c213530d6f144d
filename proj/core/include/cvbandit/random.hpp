#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace cvbandit {

/// Seeded pseudo-random source (xoshiro256** seeded through SplitMix64).
///
/// Draw sequences are fully determined by the seed and do not depend on the
/// standard library implementation: the uniform and normal transforms are
/// implemented here rather than through <random> distributions.
/// Independent streams for parallel replications come from derive().
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed = 0);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    // Uniform on (0, 1).
    double uniform_open() noexcept;
    // Standard normal (Marsaglia polar method).
    double normal() noexcept;

    /// A new source whose stream is a fixed function of (seed(), stream).
    /// Does not depend on, or advance, this source's state.
    RandomSource derive(std::uint64_t stream) const;

    // UniformRandomBitGenerator surface so <algorithm> helpers accept it.
    using result_type = std::uint64_t;
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }
    result_type operator()() noexcept { return next_u64(); }

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_{};
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Jointly Gaussian (reward, side-information) pair.
struct BivariateGaussianSpec {
    double mean_x = 0.0;
    double mean_w = 0.0;
    double std_x = 1.0;
    double std_w = 1.0;
    double rho = 0.0;

    // Throws std::domain_error on negative deviations or |rho| > 1.
    void validate() const;
};

/// x = mean_x + std_x z1, w = mean_w + std_w (rho z1 + sqrt(1 - rho^2) z2).
std::pair<double, double> sample_bivariate_gaussian(const BivariateGaussianSpec& spec,
                                                    RandomSource& rng);

} // namespace cvbandit
