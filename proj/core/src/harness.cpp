#include "cvbandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <system_error>
#include <thread>

#include "cvbandit/stats.hpp"

namespace cvbandit {

namespace {

constexpr std::uint64_t kEnvironmentStream = 1;
constexpr std::uint64_t kTruthStream = 0x74727574ULL;
constexpr std::uint64_t kCalibrationStream = 0x63616c69ULL;

std::string slug(std::string_view name) {
    std::string out;
    for (char ch : name) {
        const auto c = static_cast<unsigned char>(ch);
        out.push_back(std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '-');
    }
    return out;
}

void append_double(std::string& out, double value) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", value);
    out.append(buf, static_cast<std::size_t>(n));
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec)
            throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " +
                                     ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.close();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

double regret_at(const RegretTrace& trace, std::int64_t t, double mu_star) {
    const auto& rec = trace.records.at(static_cast<std::size_t>(t - 1));
    return static_cast<double>(t) * mu_star - rec.cum_reward;
}

} // namespace

std::string format_double(double value) {
    std::string out;
    append_double(out, value);
    return out;
}

std::uint64_t run_seed(std::uint64_t base_seed, std::string_view policy, std::size_t run) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::string_view bytes) {
        for (char ch : bytes) {
            h ^= static_cast<unsigned char>(ch);
            h *= 0x100000001b3ULL;
        }
    };
    mix(policy);
    mix("#");
    mix(std::to_string(run));
    return base_seed ^ h;
}

PreparedExperiment prepare(const ExperimentConfig& config) {
    config.validate();
    PreparedExperiment ex{config, {}, {}};
    const RandomSource root(config.base_seed);
    ex.truth = true_means(config.arms, config.truth_samples, root.derive(kTruthStream));
    if (config.omega_mode.kind == OmegaMode::Kind::calibrated) {
        ex.policy_omegas =
            calibrate_si_means(config.arms, config.omega_mode.samples, root.derive(kCalibrationStream));
    } else {
        for (const auto& arm : config.arms) ex.policy_omegas.push_back(si_mean(arm));
    }
    return ex;
}

RegretTrace run_single(const PreparedExperiment& experiment, const PolicySpec& policy_spec,
                       std::uint64_t seed, std::size_t run) {
    const auto& cfg = experiment.config;
    Environment env(cfg.arms, RandomSource(seed).derive(kEnvironmentStream));
    Policy policy(policy_spec, experiment.policy_omegas);

    RegretTrace trace;
    trace.policy = policy_spec.display_name();
    trace.run = run;
    trace.seed = seed;
    trace.records.reserve(static_cast<std::size_t>(cfg.horizon));
    double cumulative = 0.0;
    for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
        const std::size_t arm = policy.select_arm();
        const ObservationPair obs = env.pull(arm);
        policy.update(arm, obs);
        cumulative += obs.reward;
        trace.records.push_back(RoundRecord{t, arm, obs.reward, cumulative});
    }
    trace.pulls.reserve(policy.arm_count());
    for (const auto& arm : policy.arms()) trace.pulls.push_back(arm.pulls());
    return trace;
}

RegretTrace run_single(const ExperimentConfig& config, const PolicySpec& policy,
                       std::uint64_t seed) {
    return run_single(prepare(config), policy, seed);
}

std::vector<double> empirical_regret(const RegretTrace& trace, double mu_star) {
    std::vector<double> out;
    out.reserve(trace.records.size());
    for (const auto& rec : trace.records)
        out.push_back(static_cast<double>(rec.t) * mu_star - rec.cum_reward);
    return out;
}

std::vector<double> pseudo_regret(const RegretTrace& trace, const std::vector<double>& means) {
    const double mu_star = *std::max_element(means.begin(), means.end());
    std::vector<double> out;
    out.reserve(trace.records.size());
    double acc = 0.0;
    for (const auto& rec : trace.records) {
        acc += mu_star - means.at(rec.arm);
        out.push_back(acc);
    }
    return out;
}

double regret_bound_with_v(const BoundParams& params, double v) {
    if (params.deltas.size() != params.rhos.size() || params.deltas.size() != params.sigmas2.size())
        throw std::invalid_argument("regret bound: deltas, rhos and sigmas2 must have equal length");
    constexpr double pi2_over_3 = std::numbers::pi * std::numbers::pi / 3.0;
    double total = 0.0;
    for (std::size_t i = 0; i < params.deltas.size(); ++i) {
        const double delta = params.deltas[i];
        const double rho = params.rhos[i];
        if (!(delta > 0.0)) throw std::invalid_argument("regret bound: gaps must be positive");
        if (!(std::fabs(rho) <= 1.0)) throw std::invalid_argument("regret bound: |rho| must be <= 1");
        total += v * v * params.c * (1.0 - rho * rho) * params.sigmas2[i] / delta +
                 delta * pi2_over_3 + delta;
    }
    return 8.0 * total;
}

double theoretical_regret_bound(const BoundParams& params, std::int64_t horizon) {
    if (horizon < 3) throw std::invalid_argument("regret bound: horizon must be >= 3");
    return regret_bound_with_v(params, percentile_v(horizon, params.alpha, horizon - 2));
}

BoundParams bound_params(const TrueMeans& truth, double c, double alpha) {
    BoundParams params;
    params.c = c;
    params.alpha = alpha;
    for (std::size_t i = 0; i < truth.means.size(); ++i) {
        const double delta = truth.mu_star - truth.means[i];
        if (!(delta > 0.0)) continue;
        params.deltas.push_back(delta);
        params.rhos.push_back(std::clamp(truth.rhos[i], -1.0, 1.0));
        params.sigmas2.push_back(truth.stddevs[i] * truth.stddevs[i]);
    }
    return params;
}

std::vector<std::int64_t> checkpoints_for(std::int64_t horizon) {
    std::vector<std::int64_t> out;
    for (std::int64_t cp : {horizon / 10, horizon / 2, horizon}) {
        cp = std::max<std::int64_t>(cp, 1);
        if (out.empty() || out.back() != cp) out.push_back(cp);
    }
    return out;
}

std::vector<double> estimate_c_factors(const std::vector<std::vector<std::size_t>>& pulls,
                                       std::int64_t horizon, double alpha) {
    if (pulls.empty()) return {};
    const double v_tt = percentile_v(horizon, alpha, horizon - 2);
    std::vector<double> out(pulls.front().size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double sum = 0.0;
        std::size_t used = 0;
        for (const auto& run : pulls) {
            if (run.at(i) < 3) continue;
            const double ratio =
                percentile_v(horizon, alpha, static_cast<std::int64_t>(run[i]) - 2) / v_tt;
            sum += ratio * ratio;
            ++used;
        }
        out[i] = used ? sum / static_cast<double>(used) : std::nan("");
    }
    return out;
}

void write_trace_csv(const RegretTrace& trace, double mu_star, const std::filesystem::path& path) {
    std::string out;
    out.reserve(trace.records.size() * 80 + 64);
    out.append(kTraceHeader).push_back('\n');
    const std::string run = std::to_string(trace.run);
    for (const auto& rec : trace.records) {
        out.append(std::to_string(rec.t)).push_back(',');
        out.append(trace.policy).push_back(',');
        out.append(run).push_back(',');
        out.append(std::to_string(rec.arm)).push_back(',');
        append_double(out, rec.reward);
        out.push_back(',');
        append_double(out, rec.cum_reward);
        out.push_back(',');
        append_double(out, static_cast<double>(rec.t) * mu_star - rec.cum_reward);
        out.push_back('\n');
    }
    write_file(path, out);
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path) {
    std::string out;
    out.append(kSummaryHeader).push_back('\n');
    for (const auto& row : rows) {
        out.append(row.policy).push_back(',');
        out.append(std::to_string(row.checkpoint)).push_back(',');
        append_double(out, row.mean_regret);
        out.push_back(',');
        append_double(out, row.stderr_regret);
        out.push_back(',');
        out.append(std::to_string(row.runs)).push_back('\n');
    }
    write_file(path, out);
}

namespace {

void write_truth_csv(const PreparedExperiment& ex, const std::filesystem::path& path) {
    std::string out = "arm,mean,stderr,stddev,rho,omega\n";
    for (std::size_t i = 0; i < ex.truth.means.size(); ++i) {
        out.append(std::to_string(i)).push_back(',');
        append_double(out, ex.truth.means[i]);
        out.push_back(',');
        append_double(out, ex.truth.stderrs[i]);
        out.push_back(',');
        append_double(out, ex.truth.stddevs[i]);
        out.push_back(',');
        append_double(out, ex.truth.rhos[i]);
        out.push_back(',');
        append_double(out, ex.policy_omegas[i]);
        out.push_back('\n');
    }
    write_file(path, out);
}

struct TaskResult {
    std::vector<double> checkpoint_regret;
    double final_regret = 0.0;
    double final_pseudo = 0.0;
    std::vector<std::size_t> pulls;
};

} // namespace

BatchResult run_batch(const ExperimentConfig& config, const BatchOptions& options) {
    const PreparedExperiment ex = prepare(config);
    const auto checkpoints = checkpoints_for(config.horizon);
    const std::size_t n_policies = config.policies.size();
    const std::size_t n_tasks = n_policies * config.runs;
    std::vector<TaskResult> results(n_tasks);

    if (options.output_dir) std::filesystem::create_directories(*options.output_dir);

    auto run_task = [&](std::size_t task) {
        const std::size_t p = task / config.runs;
        const std::size_t r = task % config.runs;
        const auto& spec = config.policies[p];
        const std::uint64_t seed = run_seed(config.base_seed, spec.display_name(), r);
        const RegretTrace trace = run_single(ex, spec, seed, r);

        TaskResult& out = results[task];
        for (auto cp : checkpoints) out.checkpoint_regret.push_back(regret_at(trace, cp, ex.truth.mu_star));
        out.final_regret = regret_at(trace, config.horizon, ex.truth.mu_star);
        const auto pseudo = pseudo_regret(trace, ex.truth.means);
        out.final_pseudo = pseudo.back();
        out.pulls = trace.pulls;

        if (options.output_dir && options.write_traces) {
            const auto file = *options.output_dir / "traces" /
                              (slug(spec.display_name()) + "_run" + std::to_string(r) + ".csv");
            write_trace_csv(trace, ex.truth.mu_star, file);
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, n_tasks));
    if (workers == 1) {
        for (std::size_t task = 0; task < n_tasks; ++task) run_task(task);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t task = next.fetch_add(1);
                    if (task >= n_tasks) return;
                    try {
                        run_task(task);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next.store(n_tasks);
                        return;
                    }
                }
            });
        }
        pool.clear();  // joins
        if (failure) std::rethrow_exception(failure);
    }

    BatchResult batch;
    batch.truth = ex.truth;
    batch.policy_omegas = ex.policy_omegas;
    batch.checkpoints = checkpoints;
    for (std::size_t p = 0; p < n_policies; ++p) {
        PolicyResult pr;
        pr.policy = config.policies[p].display_name();
        for (std::size_t r = 0; r < config.runs; ++r) {
            const auto& res = results[p * config.runs + r];
            pr.final_regret.push_back(res.final_regret);
            pr.final_pseudo_regret.push_back(res.final_pseudo);
            pr.pulls.push_back(res.pulls);
        }
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            double sum = 0.0;
            for (std::size_t r = 0; r < config.runs; ++r) sum += results[p * config.runs + r].checkpoint_regret[c];
            const double n = static_cast<double>(config.runs);
            const double mean = sum / n;
            double ss = 0.0;
            for (std::size_t r = 0; r < config.runs; ++r) {
                const double d = results[p * config.runs + r].checkpoint_regret[c] - mean;
                ss += d * d;
            }
            const double se = config.runs > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
            batch.summary.push_back(SummaryRow{pr.policy, checkpoints[c], mean, se, config.runs});
        }
        batch.policies.push_back(std::move(pr));
    }

    if (options.output_dir) {
        write_summary_csv(batch.summary, *options.output_dir / "summary.csv");
        write_truth_csv(ex, *options.output_dir / "truth.csv");
    }
    return batch;
}

} // namespace cvbandit
