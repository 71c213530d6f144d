#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvbandit/cv_estimation.hpp"

namespace cvbandit {

enum class PolicyKind { ucbwsi, ucbwsi_split, ucb1_normal, ucbv };

/// Canonical display name: "UCBwSI", "UCBwSI-Split", "UCB1-Normal", "UCB-V".
std::string_view policy_name(PolicyKind kind);
/// Accepts the display names and lower-case / underscore variants.
std::optional<PolicyKind> parse_policy_kind(std::string_view text);

struct PolicySpec {
    PolicyKind kind = PolicyKind::ucbwsi;
    double alpha = 2.0;      // exploration exponent, > 1
    double zeta = 1.2;       // UCB-V exploration constant
    double c = 1.0;          // UCB-V range constant
    int init_pulls = 4;      // forced round-robin plays per arm
    EstimatorOptions estimator{};
    std::string label;       // overrides the display name in outputs

    std::string display_name() const;
};

struct ArmState {
    SampleBuffer buffer;

    std::size_t pulls() const noexcept { return buffer.size(); }
};

// Index functions. `t` is the round index handed to the percentile (the
// number of completed rounds when called from a Policy).

/// cv mean + percentile_v(t, alpha, N - 2) sqrt(cv variance). A degenerate
/// side-information buffer falls back to the plain mean with dof N - 1.
double ucbwsi_index(const ArmState& arm, std::int64_t t, double alpha,
                    const EstimatorOptions& options = {});

/// split mean + percentile_v(t, alpha, N - 1) sqrt(split variance). Needs N >= 3.
double ucbwsi_split_index(const ArmState& arm, std::int64_t t, double alpha,
                          const EstimatorOptions& options = {});

/// mean + sqrt(16 (sum x^2 - N mean^2) / (N - 1) * ln(t - 1) / N).
double ucb1_normal_index(const ArmState& arm, std::int64_t t);

/// mean + sqrt(2 V zeta ln t / N) + 3 c zeta ln t / N, V the biased
/// empirical variance.
double ucbv_index(const ArmState& arm, std::int64_t t, double zeta = 1.2, double c = 1.0);
/// Same with ln t supplied directly.
double ucbv_index_log(const ArmState& arm, double log_t, double zeta = 1.2, double c = 1.0);

/// Deterministic select/update state machine for one policy over K arms.
///
/// Rounds 1..K*init_pulls play arms 0..K-1 round-robin; afterwards the arm
/// with the largest index is played, ties going to the lowest arm index.
/// Index values are cached per arm and recomputed only for the arm that
/// received a new sample; the percentile term is re-evaluated every round.
class Policy {
public:
    Policy(PolicySpec spec, std::vector<double> omegas);

    const PolicySpec& spec() const noexcept { return spec_; }
    std::size_t arm_count() const noexcept { return arms_.size(); }
    const std::vector<ArmState>& arms() const noexcept { return arms_; }
    // Completed rounds; equals the total number of pulls.
    std::int64_t round() const noexcept { return round_; }
    bool initializing() const noexcept;

    std::size_t select_arm();
    void update(std::size_t arm, const ObservationPair& obs);

    /// Index of `arm` at round index `t` (from the cache).
    double index(std::size_t arm, std::int64_t t) const;
    /// All indices at the index time select_arm() would use.
    std::vector<double> indices() const;

private:
    struct Cached {
        double mean = 0.0;
        double spread = 0.0;   // sqrt(variance) or UCB-V's variance term
        std::int64_t dof = 1;
        bool valid = false;
    };

    void refresh(std::size_t arm);
    std::int64_t index_time() const noexcept { return round_; }

    PolicySpec spec_;
    std::vector<ArmState> arms_;
    std::vector<Cached> cache_;
    std::int64_t round_ = 0;
};

/// Argmax with ties broken towards the lowest index.
std::size_t argmax_lowest(const std::vector<double>& values);

} // namespace cvbandit
