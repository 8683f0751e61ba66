// qtraj: run, sweep, verify and list presets.
//
// Exit codes: 0 ok, 1 verification failed, 2 invalid configuration,
// 3 I/O error.

#include "qtraj/acceptance.hpp"
#include "qtraj/config.hpp"
#include "qtraj/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

namespace {

struct Common {
    std::string config_path;
    std::string preset_name;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "config file (key = value)");
    cmd->add_option("--preset", c.preset_name, "bundled preset name");
    cmd->add_option("--seed", c.seed, "master seed override");
    cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", c.out, "output directory override");
}

qtraj::RunConfig resolve(const Common& c) {
    if (c.config_path.empty() == c.preset_name.empty()) {
        throw qtraj::ConfigError("give exactly one of --config or --preset");
    }
    qtraj::RunConfig cfg =
        c.preset_name.empty() ? qtraj::load_config(c.config_path) : qtraj::preset(c.preset_name);
    if (c.seed) cfg.seed = *c.seed;
    if (!c.out.empty()) cfg.output = c.out;
    cfg.validate();
    return cfg;
}

void print_stats(const qtraj::BatchStats& s) {
    std::printf("trajectories %ld  success %ld  p = %.4f [%.4f, %.4f]", s.n_trajectories,
                s.n_success, s.p_success, s.ci_low, s.ci_high);
    if (s.mean_fidelity) std::printf("  F = %.5f +- %.5f", *s.mean_fidelity, *s.fidelity_stderr);
    std::printf("\n");
}

int cmd_run(const Common& c) {
    const qtraj::RunConfig cfg = resolve(c);
    if (cfg.sweep_axis != qtraj::SweepAxis::none) {
        throw qtraj::ConfigError("config defines a sweep; use `qtraj sweep`");
    }
    const auto outcomes = qtraj::run_batch(cfg, c.jobs);
    qtraj::write_run_files(cfg.output, cfg, outcomes);
    print_stats(qtraj::aggregate(outcomes));
    std::printf("wrote %s\n", cfg.output.c_str());
    return 0;
}

int cmd_sweep(const Common& c) {
    const qtraj::RunConfig cfg = resolve(c);
    const auto rows = qtraj::run_sweep(cfg, c.jobs);
    qtraj::write_sweep_files(cfg.output, cfg, rows);
    std::cout << qtraj::sweep_csv(rows);
    std::printf("wrote %s\n", cfg.output.c_str());
    return 0;
}

int cmd_verify(const qtraj::VerifyOptions& opt, bool list_only) {
    const auto& checks = qtraj::acceptance_checks();
    if (list_only) {
        for (const auto& chk : checks) std::printf("%-20s %s\n", chk.name.c_str(), chk.summary.c_str());
        return 0;
    }
    bool all = true;
    for (const auto& chk : checks) {
        const qtraj::CheckResult r = chk.run(opt);
        all = all && r.passed;
        std::printf("%s %-20s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%s\n", all ? "all checks passed" : "some checks FAILED");
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-trajectory simulator for distant-atom entanglement via cavity photons"};
    app.require_subcommand(1);

    Common run_opts, sweep_opts;
    add_common(app.add_subcommand("run", "run one batch of trajectories"), run_opts);
    add_common(app.add_subcommand("sweep", "run a parameter sweep"), sweep_opts);

    qtraj::VerifyOptions verify_opts;
    bool list_only = false;
    auto* verify = app.add_subcommand("verify", "run the acceptance checks");
    verify->add_option("--seed", verify_opts.seed, "master seed");
    verify->add_option("--jobs", verify_opts.jobs, "worker threads")->check(CLI::PositiveNumber);
    verify->add_flag("--list", list_only, "list checks without running");

    auto* presets = app.add_subcommand("presets", "list bundled presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("run")) return cmd_run(run_opts);
        if (app.got_subcommand("sweep")) return cmd_sweep(sweep_opts);
        if (app.got_subcommand("verify")) return cmd_verify(verify_opts, list_only);
        if (presets->parsed()) {
            for (const auto& name : qtraj::preset_names()) std::printf("%s\n", name.c_str());
            return 0;
        }
    } catch (const qtraj::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const qtraj::ConfigError& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    }
    return 0;
}
