#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvbandit/environments.hpp"
#include "cvbandit/policies.hpp"

namespace cvbandit {

struct OmegaMode {
    enum class Kind { exact, calibrated };
    Kind kind = Kind::exact;
    std::size_t samples = 1'000'000;  // calibration draws per arm
};

struct ExperimentConfig {
    std::int64_t horizon = 5000;
    std::size_t runs = 50;
    std::uint64_t base_seed = 1;
    std::vector<PolicySpec> policies;
    std::vector<ArmModel> arms;
    OmegaMode omega_mode{};
    std::filesystem::path output_dir = "results";
    std::size_t workers = 1;
    std::size_t truth_samples = 100'000;  // Monte-Carlo draws for true means
    double bound_c = 1.5;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Parse and validate a JSON configuration; defaults are filled in for
/// omitted optional fields.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RoundRecord {
    std::int64_t t = 0;
    std::size_t arm = 0;
    double reward = 0.0;
    double cum_reward = 0.0;
};

struct RegretTrace {
    std::string policy;
    std::size_t run = 0;
    std::uint64_t seed = 0;
    std::vector<RoundRecord> records;
    std::vector<std::size_t> pulls;  // N_i(T)
};

/// Per-run seed: base_seed XOR FNV-1a-64 of "<policy display name>#<run>".
std::uint64_t run_seed(std::uint64_t base_seed, std::string_view policy, std::size_t run);

/// Truth and SI means shared by every run of a configuration.
struct PreparedExperiment {
    ExperimentConfig config;
    TrueMeans truth;
    std::vector<double> policy_omegas;  // exact or calibrated
};

PreparedExperiment prepare(const ExperimentConfig& config);

/// One replication of `policy` with environment stream derived from `seed`.
RegretTrace run_single(const PreparedExperiment& experiment, const PolicySpec& policy,
                       std::uint64_t seed, std::size_t run = 0);
RegretTrace run_single(const ExperimentConfig& config, const PolicySpec& policy,
                       std::uint64_t seed);

/// R_t = t mu_star - sum_{r <= t} reward_r for t = 1..T.
std::vector<double> empirical_regret(const RegretTrace& trace, double mu_star);
/// sum_{r <= t} (mu_star - mu_{arm_r}) for t = 1..T.
std::vector<double> pseudo_regret(const RegretTrace& trace, const std::vector<double>& means);

struct BoundParams {
    std::vector<double> deltas;  // gaps of the suboptimal arms, > 0
    std::vector<double> rhos;
    std::vector<double> sigmas2;
    double c = 1.5;
    double alpha = 2.0;
};

/// 8 sum_i ( V^2 C (1 - rho_i^2) sigma_i^2 / Delta_i + Delta_i pi^2 / 3 + Delta_i )
/// with V = percentile_v(T, alpha, T - 2).
double theoretical_regret_bound(const BoundParams& params, std::int64_t horizon);
/// Same expression with the percentile supplied.
double regret_bound_with_v(const BoundParams& params, double v);

/// Gaps and moments of the suboptimal arms (arms tied with the best are skipped).
BoundParams bound_params(const TrueMeans& truth, double c = 1.5, double alpha = 2.0);

struct SummaryRow {
    std::string policy;
    std::int64_t checkpoint = 0;
    double mean_regret = 0.0;
    double stderr_regret = 0.0;
    std::size_t runs = 0;
};

struct PolicyResult {
    std::string policy;
    std::vector<double> final_regret;                 // per run
    std::vector<double> final_pseudo_regret;          // per run
    std::vector<std::vector<std::size_t>> pulls;      // per run, N_i(T)
};

struct BatchOptions {
    std::size_t workers = 1;
    bool write_traces = true;
    // Empty: nothing is written.
    std::optional<std::filesystem::path> output_dir;
};

struct BatchResult {
    TrueMeans truth;
    std::vector<double> policy_omegas;
    std::vector<std::int64_t> checkpoints;
    std::vector<SummaryRow> summary;
    std::vector<PolicyResult> policies;
};

/// Checkpoints T/10, T/2, T (deduplicated, at least 1).
std::vector<std::int64_t> checkpoints_for(std::int64_t horizon);

/// Runs every (policy, run) pair. Results do not depend on `workers`.
BatchResult run_batch(const ExperimentConfig& config, const BatchOptions& options);

/// Empirical E[(V_{T,N_i(T)} / V_{T,T})^2] per arm from recorded pulls
/// (arms with N_i(T) < 3 are skipped in the average).
std::vector<double> estimate_c_factors(const std::vector<std::vector<std::size_t>>& pulls,
                                       std::int64_t horizon, double alpha = 2.0);

// CSV helpers: 17 significant digits for floating-point values.
std::string format_double(double value);
void write_trace_csv(const RegretTrace& trace, double mu_star, const std::filesystem::path& path);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);

inline constexpr std::string_view kTraceHeader = "t,policy,run,arm,reward,cum_reward,cum_regret";
inline constexpr std::string_view kSummaryHeader = "policy,checkpoint,mean_regret,stderr,runs";

} // namespace cvbandit
