#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "cvbandit/cv_estimation.hpp"
#include "cvbandit/random.hpp"

namespace cvbandit {

/// Scalar marginal used by the SINR and general arms. Every kind is a
/// monotone transform of one standard normal draw, which is what lets the
/// general arm couple two marginals through a Gaussian copula.
struct Distribution {
    enum class Kind {
        constant,      // value = a
        normal,        // a + b z
        lognormal,     // exp(a + b z)
        db_normal,     // 10^((a + b z) / 10): a dB-valued Gaussian in linear units
        shifted_beta,  // lo + (hi - lo) Beta(a, b)
    };

    Kind kind = Kind::constant;
    double a = 0.0;
    double b = 0.0;
    double lo = 0.0;
    double hi = 1.0;

    static Distribution constant(double value) { return {Kind::constant, value}; }
    static Distribution normal(double mean, double stddev) { return {Kind::normal, mean, stddev}; }
    static Distribution lognormal(double mu, double sigma) { return {Kind::lognormal, mu, sigma}; }
    static Distribution db_normal(double mean_db, double std_db) {
        return {Kind::db_normal, mean_db, std_db};
    }
    static Distribution shifted_beta(double a, double b, double lo, double hi) {
        return {Kind::shifted_beta, a, b, lo, hi};
    }

    void validate() const;
    double from_standard_normal(double z) const;
    double sample(RandomSource& rng) const { return from_standard_normal(rng.normal()); }
    double mean() const;
    bool nonnegative() const;
};

struct GaussianArm {
    BivariateGaussianSpec spec;
};

enum class SideInfoKind {
    tx_interference,  // W is interference measured at the transmitter
    channel_gain,     // W is the channel power gain |h|^2
};

std::string_view side_info_kind_name(SideInfoKind kind);

/// Rate arm over a hidden-factor SINR model.
///
/// tx_interference: reward = log2(1 + g P / (g W + I + noise)), side_info = W
///   (with scale_interference_by_gain = false the denominator is W + I + noise)
/// channel_gain:    reward = log2(1 + W P / (I + noise)), side_info = W = g
struct SinrArm {
    double power = 1.0;
    Distribution gain = Distribution::constant(1.0);
    double noise = 1.0;
    Distribution hidden_interference = Distribution::constant(0.0);
    Distribution measured_interference = Distribution::constant(0.0);
    SideInfoKind si_kind = SideInfoKind::tx_interference;
    bool scale_interference_by_gain = true;
    std::optional<double> si_mean;  // overrides the analytic SI mean

    const Distribution& side_info_distribution() const {
        return si_kind == SideInfoKind::channel_gain ? gain : measured_interference;
    }
};

/// Non-Gaussian pair with a Gaussian copula of correlation copula_rho.
struct GeneralArm {
    Distribution reward = Distribution::lognormal(0.0, 0.5);
    Distribution side_info = Distribution::lognormal(0.0, 0.5);
    double copula_rho = 0.0;
};

using ArmModel = std::variant<GaussianArm, SinrArm, GeneralArm>;

void validate_arm(const ArmModel& arm);

/// log2(1 + sinr); throws std::domain_error for negative or NaN input.
double shannon_rate(double sinr);

/// One draw of (reward, side_info) from an arm model.
ObservationPair draw(const ArmModel& arm, RandomSource& rng);

/// Known SI mean: the override if set, else the closed-form mean.
double si_mean(const ArmModel& arm);

/// Set of arms with the random stream that feeds their draws.
class Environment {
public:
    Environment(std::vector<ArmModel> arms, RandomSource rng);

    std::size_t arm_count() const noexcept { return arms_.size(); }
    const std::vector<ArmModel>& arms() const noexcept { return arms_; }
    const RandomSource& rng() const noexcept { return rng_; }

    ObservationPair pull(std::size_t arm);

    /// Known SI means handed to the policies.
    std::vector<double> si_means() const;

private:
    std::vector<ArmModel> arms_;
    RandomSource rng_;
};

struct TrueMeans {
    std::vector<double> means;
    std::vector<double> stderrs;   // 0 for closed-form means
    std::vector<double> stddevs;   // reward standard deviation
    std::vector<double> rhos;      // corr(reward, side_info)
    std::size_t best = 0;          // lowest index attaining the max
    double mu_star = 0.0;
};

/// Closed-form moments for Gaussian arms; Monte-Carlo with n_mc draws
/// (own stream `rng`) for the others.
TrueMeans true_means(const std::vector<ArmModel>& arms, std::size_t n_mc, RandomSource rng);
/// Uses a stream derived from the environment's seed; does not advance it.
TrueMeans true_means(const Environment& env, std::size_t n_mc);

/// Per-arm sample mean of n side-information draws from `rng`.
std::vector<double> calibrate_si_means(const std::vector<ArmModel>& arms, std::size_t n,
                                       RandomSource rng);
std::vector<double> calibrate_si_means(const Environment& env, std::size_t n);

// Built-in suites parameterized by the published operating points:
// SNR means {5,-1,3,-9,7,-2,18,-7} dB, SI means {1.7,0.2,-3,-0.9,-0.4,1,-0.6,1}.
namespace suites {

inline constexpr double snr_mean_db[8] = {5, -1, 3, -9, 7, -2, 18, -7};
inline constexpr double snr_std_low[8] = {0.5, 0.5, 1, 0.8, 0.1, 0.3, 0.2, 0.4};
inline constexpr double snr_std_high[8] = {2, 2, 2, 2, 2, 2, 2, 2};
inline constexpr double si_mean_db[8] = {1.7, 0.2, -3, -0.9, -0.4, 1, -0.6, 1};
inline constexpr double si_std_low[8] = {0.2, 0.4, 0.3, 0.2, 0.3, 0.1, 0.4, 0.7};
inline constexpr double si_std_high[8] = {2, 2, 2, 2, 2, 2, 2, 2};

/// Jointly Gaussian arms: mean = mean_scale * SNR mean, sigma = high SNR
/// std, omega = SI mean, sigma_w = low SI std, common correlation rho.
std::vector<ArmModel> gaussian(double rho, double mean_scale = 0.1);

/// tx_interference SINR arms with P = 1, noise = 1: gain is dB-normal at
/// the SNR means (std 2 dB), measured interference dB-normal at the SI
/// means (std 2 dB), hidden interference dB-normal(-20, 2).
std::vector<ArmModel> sinr();

} // namespace suites

} // namespace cvbandit
