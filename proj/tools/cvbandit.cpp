#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cvbandit/errors.hpp"
#include "cvbandit/harness.hpp"
#include "cvbandit/selftest.hpp"
#include "cvbandit/stats.hpp"

namespace {

struct RunArgs {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> workers;
    bool no_traces = false;
};

int cmd_run(const RunArgs& args) {
    auto cfg = cvbandit::load_config(args.config);
    if (args.seed) cfg.base_seed = *args.seed;
    if (args.runs) cfg.runs = *args.runs;
    if (args.workers) cfg.workers = *args.workers;
    if (args.out) cfg.output_dir = *args.out;
    cfg.validate();

    cvbandit::BatchOptions options;
    options.workers = cfg.workers;
    options.write_traces = !args.no_traces;
    options.output_dir = cfg.output_dir;
    const auto result = cvbandit::run_batch(cfg, options);

    std::printf("%-14s %10s %16s %12s %6s\n", "policy", "checkpoint", "mean_regret", "stderr", "runs");
    for (const auto& row : result.summary)
        std::printf("%-14s %10lld %16.4f %12.4f %6zu\n", row.policy.c_str(),
                    static_cast<long long>(row.checkpoint), row.mean_regret, row.stderr_regret,
                    row.runs);
    std::printf("wrote %s\n", (cfg.output_dir / "summary.csv").string().c_str());
    return 0;
}

int cmd_bound(const std::string& path) {
    const auto cfg = cvbandit::load_config(path);
    const auto ex = cvbandit::prepare(cfg);
    double alpha = 2.0;
    for (const auto& p : cfg.policies)
        if (p.kind == cvbandit::PolicyKind::ucbwsi) {
            alpha = p.alpha;
            break;
        }
    const auto params = cvbandit::bound_params(ex.truth, cfg.bound_c, alpha);
    const double v = cvbandit::percentile_v(cfg.horizon, alpha, cfg.horizon - 2);
    std::printf("horizon %lld\n", static_cast<long long>(cfg.horizon));
    std::printf("best_arm %zu mu_star %s\n", ex.truth.best,
                cvbandit::format_double(ex.truth.mu_star).c_str());
    std::printf("V %s\n", cvbandit::format_double(v).c_str());
    std::printf("bound %s\n",
                cvbandit::format_double(cvbandit::theoretical_regret_bound(params, cfg.horizon)).c_str());
    return 0;
}

int cmd_selftest(std::size_t replications, std::uint64_t seed) {
    cvbandit::SelftestOptions options;
    options.replications = replications;
    options.seed = seed;
    int failures = 0;
    for (const auto& check : cvbandit::run_selftest(options)) {
        std::printf("%s  %s  (%s)\n", check.passed ? "PASS" : "FAIL", check.name.c_str(),
                    check.detail.c_str());
        failures += check.passed ? 0 : 1;
    }
    std::printf("%d failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Control-variate UCB bandit experiments"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run a batch of replications and write CSV output");
    run->add_option("--config", run_args.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    run->add_option("--out", run_args.out, "Output directory");
    run->add_option("--seed", run_args.seed, "Base seed");
    run->add_option("--runs", run_args.runs, "Replications per policy");
    run->add_option("--workers", run_args.workers, "Worker threads");
    run->add_flag("--no-traces", run_args.no_traces, "Write only the summary");

    std::string bound_config;
    auto* bound = app.add_subcommand("bound", "Print the regret upper bound for a config");
    bound->add_option("--config", bound_config, "JSON experiment config")->required()->check(CLI::ExistingFile);

    std::size_t replications = 100'000;
    std::uint64_t selftest_seed = cvbandit::SelftestOptions{}.seed;
    auto* selftest = app.add_subcommand("selftest", "Run the Monte-Carlo invariant suite");
    selftest->add_option("--replications", replications, "Replications per check")->check(CLI::PositiveNumber);
    selftest->add_option("--seed", selftest_seed, "Seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_args);
        if (*bound) return cmd_bound(bound_config);
        if (*selftest) return cmd_selftest(replications, selftest_seed);
    } catch (const cvbandit::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
