#include "cvbandit/policies.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "cvbandit/errors.hpp"
#include "cvbandit/stats.hpp"

namespace cvbandit {

std::string_view policy_name(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::ucbwsi: return "UCBwSI";
    case PolicyKind::ucbwsi_split: return "UCBwSI-Split";
    case PolicyKind::ucb1_normal: return "UCB1-Normal";
    case PolicyKind::ucbv: return "UCB-V";
    }
    return "unknown";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view text) {
    std::string key;
    for (char ch : text) {
        if (ch == '-' || ch == '_' || ch == ' ') continue;
        key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    if (key == "ucbwsi") return PolicyKind::ucbwsi;
    if (key == "ucbwsisplit") return PolicyKind::ucbwsi_split;
    if (key == "ucb1normal") return PolicyKind::ucb1_normal;
    if (key == "ucbv") return PolicyKind::ucbv;
    return std::nullopt;
}

std::string PolicySpec::display_name() const {
    return label.empty() ? std::string(policy_name(kind)) : label;
}

namespace {

struct PlainStats {
    double mean;
    double sxx;  // sum (x - mean)^2
};

PlainStats plain_stats(const SampleBuffer& buf) {
    const double mean = buf.mean_x();
    double sxx = 0.0;
    for (double x : buf.xs()) sxx += (x - mean) * (x - mean);
    return {mean, sxx};
}

void require_pulls(const ArmState& arm, std::size_t needed, const char* what) {
    if (arm.pulls() < needed)
        throw InsufficientSamples(std::string(what) + ": arm has " + std::to_string(arm.pulls()) +
                                  " pulls, needs " + std::to_string(needed));
}

struct SplitSummary {
    double mean;
    double variance;
    std::int64_t dof;
};

SplitSummary split_summary(const SampleBuffer& buf, const EstimatorOptions& options) {
    if (options.use_side_info) {
        try {
            const auto est = split_estimate(buf, options.centering);
            return {est.mean, est.variance, static_cast<std::int64_t>(buf.size()) - 1};
        } catch (const DegenerateSideInfo&) {
        }
    }
    const auto plain = plain_estimate(buf);
    return {plain.mean, plain.variance, plain.dof};
}

double with_radius(double mean, double variance, std::int64_t t, double alpha, std::int64_t dof) {
    if (!(variance > 0.0)) return mean;
    return mean + percentile_v(t, alpha, dof) * std::sqrt(variance);
}

} // namespace

double ucbwsi_index(const ArmState& arm, std::int64_t t, double alpha,
                    const EstimatorOptions& options) {
    require_pulls(arm, 4, "ucbwsi_index");
    const auto est = estimate(arm.buffer, options);
    return with_radius(est.mean, est.variance, t, alpha, est.dof);
}

double ucbwsi_split_index(const ArmState& arm, std::int64_t t, double alpha,
                          const EstimatorOptions& options) {
    require_pulls(arm, 3, "ucbwsi_split_index");
    const auto est = split_summary(arm.buffer, options);
    return with_radius(est.mean, est.variance, t, alpha, est.dof);
}

double ucb1_normal_index(const ArmState& arm, std::int64_t t) {
    require_pulls(arm, 2, "ucb1_normal_index");
    if (t < 3) throw std::domain_error("ucb1_normal_index: t must be >= 3");
    const auto [mean, sxx] = plain_stats(arm.buffer);
    const double n = static_cast<double>(arm.pulls());
    const double radicand = 16.0 * (sxx / (n - 1.0)) * std::log(static_cast<double>(t - 1)) / n;
    return mean + std::sqrt(std::max(0.0, radicand));
}

double ucbv_index(const ArmState& arm, std::int64_t t, double zeta, double c) {
    if (t < 2) throw std::domain_error("ucbv_index: t must be >= 2");
    return ucbv_index_log(arm, std::log(static_cast<double>(t)), zeta, c);
}

double ucbv_index_log(const ArmState& arm, double log_t, double zeta, double c) {
    require_pulls(arm, 1, "ucbv_index");
    const auto [mean, sxx] = plain_stats(arm.buffer);
    const double n = static_cast<double>(arm.pulls());
    const double v = sxx / n;
    return mean + std::sqrt(2.0 * v * zeta * log_t / n) + 3.0 * c * zeta * log_t / n;
}

std::size_t argmax_lowest(const std::vector<double>& values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

Policy::Policy(PolicySpec spec, std::vector<double> omegas) : spec_(std::move(spec)) {
    if (omegas.size() < 2) throw std::invalid_argument("Policy: K >= 2 arms required");
    if (!(spec_.alpha > 1.0)) throw std::invalid_argument("Policy: alpha must exceed 1");
    const int min_init =
        (spec_.kind == PolicyKind::ucbwsi || spec_.kind == PolicyKind::ucbwsi_split) ? 4 : 2;
    if (spec_.init_pulls < min_init)
        throw std::invalid_argument("Policy: init_pulls must be >= " + std::to_string(min_init) +
                                    " for " + spec_.display_name());
    arms_.reserve(omegas.size());
    for (double omega : omegas) arms_.push_back(ArmState{SampleBuffer(omega)});
    cache_.resize(arms_.size());
}

bool Policy::initializing() const noexcept {
    return round_ < static_cast<std::int64_t>(arms_.size()) * spec_.init_pulls;
}

std::size_t Policy::select_arm() {
    if (initializing()) return static_cast<std::size_t>(round_ % static_cast<std::int64_t>(arms_.size()));
    return argmax_lowest(indices());
}

void Policy::update(std::size_t arm, const ObservationPair& obs) {
    if (arm >= arms_.size()) throw std::out_of_range("Policy::update: arm index out of range");
    arms_[arm].buffer.push(obs);
    ++round_;
    cache_[arm].valid = false;
    // During initialization nothing reads the cache until every arm has its
    // forced samples.
    if (!initializing()) {
        for (std::size_t i = 0; i < arms_.size(); ++i)
            if (!cache_[i].valid) refresh(i);
    }
}

void Policy::refresh(std::size_t arm) {
    const auto& buf = arms_[arm].buffer;
    Cached& c = cache_[arm];
    switch (spec_.kind) {
    case PolicyKind::ucbwsi: {
        const auto est = estimate(buf, spec_.estimator);
        c.mean = est.mean;
        c.spread = std::sqrt(est.variance);
        c.dof = est.dof;
        break;
    }
    case PolicyKind::ucbwsi_split: {
        const auto est = split_summary(buf, spec_.estimator);
        c.mean = est.mean;
        c.spread = std::sqrt(est.variance);
        c.dof = est.dof;
        break;
    }
    case PolicyKind::ucb1_normal:
    case PolicyKind::ucbv: {
        const auto [mean, sxx] = plain_stats(buf);
        const double n = static_cast<double>(buf.size());
        c.mean = mean;
        c.spread = spec_.kind == PolicyKind::ucb1_normal ? sxx / (n - 1.0) : sxx / n;
        c.dof = static_cast<std::int64_t>(buf.size());
        break;
    }
    }
    c.valid = true;
}

double Policy::index(std::size_t arm, std::int64_t t) const {
    const Cached& c = cache_.at(arm);
    if (!c.valid) throw std::logic_error("Policy::index: arm statistics not initialized");
    const double n = static_cast<double>(arms_[arm].pulls());
    switch (spec_.kind) {
    case PolicyKind::ucbwsi:
    case PolicyKind::ucbwsi_split:
        if (!(c.spread > 0.0)) return c.mean;
        return c.mean + percentile_v(t, spec_.alpha, c.dof) * c.spread;
    case PolicyKind::ucb1_normal: {
        const double radicand = 16.0 * c.spread * std::log(static_cast<double>(t - 1)) / n;
        return c.mean + std::sqrt(std::max(0.0, radicand));
    }
    case PolicyKind::ucbv: {
        const double log_t = std::log(static_cast<double>(t));
        return c.mean + std::sqrt(2.0 * c.spread * spec_.zeta * log_t / n) +
               3.0 * spec_.c * spec_.zeta * log_t / n;
    }
    }
    return c.mean;
}

std::vector<double> Policy::indices() const {
    std::vector<double> out(arms_.size());
    const std::int64_t t = index_time();
    for (std::size_t i = 0; i < arms_.size(); ++i) out[i] = index(i, t);
    return out;
}

} // namespace cvbandit
