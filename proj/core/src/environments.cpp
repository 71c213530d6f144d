#include "cvbandit/environments.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cvbandit/stats.hpp"

namespace cvbandit {

namespace {

constexpr double kDbToNeper = std::numbers::ln10 / 10.0;

// Stream offsets for the derived generators; fixed so results replay.
constexpr std::uint64_t kTruthStream = 0x7472757468ULL;        // "truth"
constexpr std::uint64_t kCalibrationStream = 0x63616c6962ULL;  // "calib"

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ObservationPair draw_sinr(const SinrArm& arm, RandomSource& rng) {
    const double gain = arm.gain.sample(rng);
    const double hidden = arm.hidden_interference.sample(rng);
    if (arm.si_kind == SideInfoKind::channel_gain) {
        const double sinr = gain * arm.power / (hidden + arm.noise);
        return {shannon_rate(sinr), gain};
    }
    const double measured = arm.measured_interference.sample(rng);
    const double scaled = arm.scale_interference_by_gain ? gain * measured : measured;
    const double sinr = gain * arm.power / (scaled + hidden + arm.noise);
    return {shannon_rate(sinr), measured};
}

ObservationPair draw_general(const GeneralArm& arm, RandomSource& rng) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double r = arm.copula_rho;
    const double zw = (r == 1.0 || r == -1.0) ? r * z1 : r * z1 + std::sqrt(1.0 - r * r) * z2;
    return {arm.reward.from_standard_normal(z1), arm.side_info.from_standard_normal(zw)};
}

} // namespace

void Distribution::validate() const {
    auto fail = [](const std::string& msg) { throw std::domain_error("distribution: " + msg); };
    if (!std::isfinite(a) || !std::isfinite(b)) fail("parameters must be finite");
    switch (kind) {
    case Kind::constant: break;
    case Kind::normal:
    case Kind::lognormal:
    case Kind::db_normal:
        if (b < 0.0) fail("spread must be >= 0");
        break;
    case Kind::shifted_beta:
        if (!(a > 0.0) || !(b > 0.0)) fail("beta shape parameters must be > 0");
        if (!(hi > lo)) fail("shifted beta requires hi > lo");
        break;
    }
}

double Distribution::from_standard_normal(double z) const {
    switch (kind) {
    case Kind::constant: return a;
    case Kind::normal: return a + b * z;
    case Kind::lognormal: return std::exp(a + b * z);
    case Kind::db_normal: return std::exp(kDbToNeper * (a + b * z));
    case Kind::shifted_beta:
        return lo + (hi - lo) * inverse_regularized_incomplete_beta(a, b, normal_cdf(z));
    }
    return a;
}

double Distribution::mean() const {
    switch (kind) {
    case Kind::constant:
    case Kind::normal: return a;
    case Kind::lognormal: return std::exp(a + 0.5 * b * b);
    case Kind::db_normal: {
        const double s = kDbToNeper * b;
        return std::exp(kDbToNeper * a + 0.5 * s * s);
    }
    case Kind::shifted_beta: return lo + (hi - lo) * a / (a + b);
    }
    return a;
}

bool Distribution::nonnegative() const {
    switch (kind) {
    case Kind::constant: return a >= 0.0;
    case Kind::normal: return b == 0.0 && a >= 0.0;
    case Kind::lognormal:
    case Kind::db_normal: return true;
    case Kind::shifted_beta: return lo >= 0.0;
    }
    return false;
}

std::string_view side_info_kind_name(SideInfoKind kind) {
    return kind == SideInfoKind::channel_gain ? "channel_gain" : "tx_interference";
}

void validate_arm(const ArmModel& arm) {
    std::visit(overloaded{
                   [](const GaussianArm& g) { g.spec.validate(); },
                   [](const SinrArm& s) {
                       if (!(s.power >= 0.0)) throw std::domain_error("sinr arm: power must be >= 0");
                       if (!(s.noise > 0.0)) throw std::domain_error("sinr arm: noise must be > 0");
                       s.gain.validate();
                       s.hidden_interference.validate();
                       s.measured_interference.validate();
                       if (!s.gain.nonnegative() || !s.hidden_interference.nonnegative() ||
                           !s.measured_interference.nonnegative())
                           throw std::domain_error("sinr arm: gain and interference must be nonnegative");
                   },
                   [](const GeneralArm& g) {
                       g.reward.validate();
                       g.side_info.validate();
                       if (!(g.copula_rho >= -1.0 && g.copula_rho <= 1.0))
                           throw std::domain_error("general arm: copula correlation must lie in [-1, 1]");
                   },
               },
               arm);
}

double shannon_rate(double sinr) {
    if (!(sinr >= 0.0)) throw std::domain_error("shannon_rate: sinr must be >= 0");
    return std::log1p(sinr) / std::numbers::ln2;
}

ObservationPair draw(const ArmModel& arm, RandomSource& rng) {
    return std::visit(overloaded{
                          [&](const GaussianArm& g) {
                              const auto [x, w] = sample_bivariate_gaussian(g.spec, rng);
                              return ObservationPair{x, w};
                          },
                          [&](const SinrArm& s) { return draw_sinr(s, rng); },
                          [&](const GeneralArm& g) { return draw_general(g, rng); },
                      },
                      arm);
}

double si_mean(const ArmModel& arm) {
    return std::visit(overloaded{
                          [](const GaussianArm& g) { return g.spec.mean_w; },
                          [](const SinrArm& s) {
                              return s.si_mean ? *s.si_mean : s.side_info_distribution().mean();
                          },
                          [](const GeneralArm& g) { return g.side_info.mean(); },
                      },
                      arm);
}

Environment::Environment(std::vector<ArmModel> arms, RandomSource rng)
    : arms_(std::move(arms)), rng_(rng) {
    if (arms_.size() < 2) throw std::invalid_argument("Environment: K >= 2 required");
    for (const auto& arm : arms_) validate_arm(arm);
}

ObservationPair Environment::pull(std::size_t arm) {
    if (arm >= arms_.size()) throw std::out_of_range("Environment::pull: arm index out of range");
    return draw(arms_[arm], rng_);
}

std::vector<double> Environment::si_means() const {
    std::vector<double> out;
    out.reserve(arms_.size());
    for (const auto& arm : arms_) out.push_back(si_mean(arm));
    return out;
}

TrueMeans true_means(const std::vector<ArmModel>& arms, std::size_t n_mc, RandomSource rng) {
    TrueMeans out;
    for (std::size_t i = 0; i < arms.size(); ++i) {
        if (const auto* g = std::get_if<GaussianArm>(&arms[i])) {
            out.means.push_back(g->spec.mean_x);
            out.stderrs.push_back(0.0);
            out.stddevs.push_back(g->spec.std_x);
            out.rhos.push_back(g->spec.rho);
            continue;
        }
        if (n_mc < 2) throw std::invalid_argument("true_means: need n_mc >= 2 for simulated arms");
        // Each arm owns a derived stream so adding arms does not shift others.
        RandomSource arm_rng = rng.derive(i);
        double mx = 0, mw = 0, sxx = 0, sww = 0, sxw = 0;
        for (std::size_t k = 1; k <= n_mc; ++k) {
            const auto obs = draw(arms[i], arm_rng);
            const double dx = obs.reward - mx;
            const double dw = obs.side_info - mw;
            mx += dx / static_cast<double>(k);
            mw += dw / static_cast<double>(k);
            sxx += dx * (obs.reward - mx);
            sww += dw * (obs.side_info - mw);
            sxw += dx * (obs.side_info - mw);
        }
        const double n = static_cast<double>(n_mc);
        const double sd = std::sqrt(sxx / (n - 1.0));
        out.means.push_back(mx);
        out.stderrs.push_back(sd / std::sqrt(n));
        out.stddevs.push_back(sd);
        out.rhos.push_back(sxx > 0.0 && sww > 0.0 ? sxw / std::sqrt(sxx * sww) : 0.0);
    }
    for (std::size_t i = 1; i < out.means.size(); ++i)
        if (out.means[i] > out.means[out.best]) out.best = i;
    out.mu_star = out.means.empty() ? 0.0 : out.means[out.best];
    return out;
}

TrueMeans true_means(const Environment& env, std::size_t n_mc) {
    return true_means(env.arms(), n_mc, env.rng().derive(kTruthStream));
}

std::vector<double> calibrate_si_means(const std::vector<ArmModel>& arms, std::size_t n,
                                       RandomSource rng) {
    if (n < 1) throw std::invalid_argument("calibrate_si_means: n must be >= 1");
    std::vector<double> out;
    out.reserve(arms.size());
    for (std::size_t i = 0; i < arms.size(); ++i) {
        RandomSource arm_rng = rng.derive(i);
        // Running mean: exact for constant side-information.
        double mean = 0.0;
        for (std::size_t k = 1; k <= n; ++k)
            mean += (draw(arms[i], arm_rng).side_info - mean) / static_cast<double>(k);
        out.push_back(mean);
    }
    return out;
}

std::vector<double> calibrate_si_means(const Environment& env, std::size_t n) {
    return calibrate_si_means(env.arms(), n, env.rng().derive(kCalibrationStream));
}

namespace suites {

std::vector<ArmModel> gaussian(double rho, double mean_scale) {
    std::vector<ArmModel> arms;
    for (int i = 0; i < 8; ++i) {
        BivariateGaussianSpec spec{mean_scale * snr_mean_db[i], si_mean_db[i], snr_std_high[i],
                                   si_std_low[i], rho};
        arms.emplace_back(GaussianArm{spec});
    }
    return arms;
}

std::vector<ArmModel> sinr() {
    std::vector<ArmModel> arms;
    for (int i = 0; i < 8; ++i) {
        SinrArm arm;
        arm.power = 1.0;
        arm.noise = 1.0;
        arm.gain = Distribution::db_normal(snr_mean_db[i], snr_std_high[i]);
        arm.measured_interference = Distribution::db_normal(si_mean_db[i], si_std_high[i]);
        arm.hidden_interference = Distribution::db_normal(-20.0, 2.0);
        arm.si_kind = SideInfoKind::tx_interference;
        arms.emplace_back(arm);
    }
    return arms;
}

} // namespace suites

} // namespace cvbandit
