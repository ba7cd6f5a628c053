// brainval: run or describe an experiment config.
//
//   brainval run <config> [--output-dir DIR] [--threads N] [--seed-override S]
//   brainval describe <config> [same flags]
//
// Exit codes: 0 success (possibly with per-point errors in errors.csv),
// 1 every point failed, 2 bad config or usage, 3 I/O failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "brainval/expcli.hpp"

namespace {

struct Args {
    std::string config;
    std::optional<std::string> output_dir;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Args& a) {
    cmd->add_option("config", a.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--output-dir", a.output_dir, "Directory for CSV tables and manifest.json");
    cmd->add_option("--threads", a.threads, "Worker threads (0 = hardware concurrency)");
    cmd->add_option("--seed-override", a.seed, "Replace every seed in the config");
}

brainval::exp::Overrides overrides(const Args& a) { return {a.output_dir, a.threads, a.seed}; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Value brain data for task learning: closed-form and Monte Carlo experiments"};
    app.set_version_flag("--version", brainval::exp::kVersion);
    app.require_subcommand(1);
    Args args;
    auto* run = app.add_subcommand("run", "Run an experiment and write its tables");
    auto* describe = app.add_subcommand("describe", "Print the plan, cost estimate and warnings without computing");
    add_common(run, args);
    add_common(describe, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    brainval::exp::ExperimentConfig cfg;
    try {
        cfg = brainval::exp::load_config(args.config, overrides(args));
    } catch (const brainval::Error& e) {
        std::cerr << "brainval: " << args.config << ": " << e.what() << '\n';
        return 2;
    }

    if (describe->parsed()) {
        std::cout << brainval::exp::describe(cfg);
        return 0;
    }

    try {
        const auto summary = brainval::exp::run(cfg);
        std::cout << "wrote";
        for (const auto& f : summary.files) std::cout << ' ' << f;
        std::cout << " to " << summary.output.string() << '\n';
        std::cout << summary.points << " points, " << summary.failed << " failed\n";
        if (summary.failed > 0) std::cerr << "brainval: see " << (summary.output / "errors.csv").string() << '\n';
        return summary.total_failure() ? 1 : 0;
    } catch (const brainval::Error& e) {
        std::cerr << "brainval: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "brainval: " << e.what() << '\n';
        return 3;
    }
}
