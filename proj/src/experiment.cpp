#include "qtraj/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>
#include <variant>

namespace qtraj {

namespace {

// Spectators with the first n0 of them in |0>, the rest in |1>.
Vector fixed_spectators(int atoms_per_cavity, int n0) {
    Index dim = 1;
    for (int k = 1; k < atoms_per_cavity; ++k) dim *= kLevelsPerAtom;
    Index idx = 0;
    for (int k = 0; k < atoms_per_cavity - 1; ++k) idx = idx * kLevelsPerAtom + (k < n0 ? 0 : 1);
    Vector phi = Vector::Zero(dim);
    phi[idx] = 1.0;
    return phi;
}

template <typename Fn>
void parallel_for(long n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    const int count = static_cast<int>(std::min<long>(jobs, n));
    for (int w = 0; w < count; ++w) {
        workers.emplace_back([&] {
            for (long i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

std::string fmt(double x, int digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << content;
    f.close();
    if (!f) throw IoError("failed writing '" + path.string() + "'");
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

}  // namespace

std::vector<ProtocolOutcome> run_batch(const RunConfig& config, int jobs) {
    config.validate();
    std::vector<ProtocolOutcome> outcomes(static_cast<std::size_t>(config.n_trajectories));
    const ProtocolOptions options = config.protocol_options();

    if (config.protocol == ProtocolKind::one) {
        const ProtocolOne protocol(config.params, config.model, options);
        parallel_for(config.n_trajectories, jobs, [&](long i) {
            RngStream rng(config.seed, static_cast<std::uint64_t>(i));
            outcomes[static_cast<std::size_t>(i)] = protocol.run(rng);
        });
        return outcomes;
    }

    const int d = config.designated_atom;
    const ProtocolTwo protocol(config.params, config.model, options, {d, d});
    const int n = config.params.atoms_per_cavity;
    parallel_for(config.n_trajectories, jobs, [&](long i) {
        RngStream rng(config.seed, static_cast<std::uint64_t>(i));
        const MultiAtomSetup setup =
            config.spectators == SpectatorMode::random
                ? sample_spectators(n, rng, d)
                : MultiAtomSetup::make(n, {d, d}, fixed_spectators(n, config.n0_a),
                                       fixed_spectators(n, config.n0_b));
        outcomes[static_cast<std::size_t>(i)] = protocol.run(setup, rng);
    });
    return outcomes;
}

RunConfig at_sweep_point(const RunConfig& config, double value) {
    RunConfig c = config;
    c.sweep_axis = SweepAxis::none;
    c.sweep_grid.clear();
    if (config.sweep_axis == SweepAxis::alpha) {
        PhysicalParams p = config.params;
        p.kappa = 0.0;
        const double z3 = derived_rates(p).z3;
        c.params.kappa = value * z3 / (2.0 * std::numbers::pi);
    } else if (config.sweep_axis == SweepAxis::gamma) {
        c.params.gamma = value;
    }
    return c;
}

std::vector<SweepRow> run_sweep(const RunConfig& config, int jobs) {
    config.validate();
    if (config.sweep_axis == SweepAxis::none) throw ConfigError("sweep: sweep_axis is none");
    std::vector<SweepRow> rows;
    for (double v : config.sweep_grid) {
        const RunConfig point = at_sweep_point(config, v);
        const auto outcomes = run_batch(point, jobs);
        SweepRow row{config.sweep_axis, v, std::nullopt, aggregate(outcomes)};
        if (config.sweep_axis == SweepAxis::alpha) row.p_analytic = p_success_analytic(v);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string outcomes_csv(const std::vector<ProtocolOutcome>& outcomes) {
    std::string out = "index,success,failure_reason,epsilon,fidelity,n_clicks,total_time_us\n";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        out += std::to_string(i) + "," + (o.success ? "1" : "0") + "," + to_string(o.failure_reason) +
               "," + std::to_string(o.epsilon) + "," + (o.fidelity ? fmt(*o.fidelity, 10) : "") +
               "," + std::to_string(o.click_times.size()) + "," + fmt(o.total_time, 10) + "\n";
    }
    return out;
}

std::string summary_csv(const BatchStats& s) {
    std::string out =
        "n_trajectories,n_success,p_success,ci_low,ci_high,mean_fidelity,fidelity_stderr,"
        "n_two_photons,n_click_in_stage3,n_spontaneous_emission,n_wait_timeout\n";
    auto count = [&](FailureReason f) { return std::to_string(s.failure_breakdown.at(f)); };
    out += std::to_string(s.n_trajectories) + "," + std::to_string(s.n_success) + "," +
           fmt(s.p_success, 10) + "," + fmt(s.ci_low, 10) + "," + fmt(s.ci_high, 10) + "," +
           (s.mean_fidelity ? fmt(*s.mean_fidelity, 10) : "") + "," +
           (s.fidelity_stderr ? fmt(*s.fidelity_stderr, 10) : "") + "," +
           count(FailureReason::two_photons) + "," + count(FailureReason::click_in_stage3) + "," +
           count(FailureReason::spontaneous_emission) + "," + count(FailureReason::wait_timeout) +
           "\n";
    return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "axis,value,p_analytic,p_numeric,ci_low,ci_high,mean_fidelity,n_traj\n";
    for (const auto& r : rows) {
        out += to_string(r.axis) + "," + fmt(r.value, 6) + "," +
               (r.p_analytic ? fmt(*r.p_analytic, 6) : "") + "," + fmt(r.stats.p_success, 6) + "," +
               fmt(r.stats.ci_low, 6) + "," + fmt(r.stats.ci_high, 6) + "," +
               (r.stats.mean_fidelity ? fmt(*r.stats.mean_fidelity, 6) : "") + "," +
               std::to_string(r.stats.n_trajectories) + "\n";
    }
    return out;
}

std::string run_info(const RunConfig& config) {
    std::string out = render_config(config);
    out += "# regime report\n";
    try {
        PhysicalParams p = config.params;
        if (config.sweep_axis == SweepAxis::alpha && !config.sweep_grid.empty()) {
            p = at_sweep_point(config, config.sweep_grid.back()).params;
        }
        for (const auto& line : regime_report(derived_rates(p))) out += "# " + line + "\n";
    } catch (const std::exception& e) {
        out += std::string("# unavailable: ") + e.what() + "\n";
    }
    if (config.protocol == ProtocolKind::two && config.spectators == SpectatorMode::random) {
        out += "# spectators: N0 uniform on {0..N-1}, |Phi> Haar-random within the N0 family\n";
    }
    if (!(config.params.kappa > 0.0)) return out;
    out += "# wait cutoff: " + fmt(config.t_wait_multiple, 6) + " / kappa\n";
    return out;
}

void write_run_files(const std::string& dir, const RunConfig& config,
                     const std::vector<ProtocolOutcome>& outcomes) {
    ensure_dir(dir);
    const std::filesystem::path base(dir);
    write_file(base / "outcomes.csv", outcomes_csv(outcomes));
    write_file(base / "summary.csv", summary_csv(aggregate(outcomes)));
    write_file(base / "run_info.txt", run_info(config));
}

void write_sweep_files(const std::string& dir, const RunConfig& config,
                       const std::vector<SweepRow>& rows) {
    ensure_dir(dir);
    const std::filesystem::path base(dir);
    write_file(base / "sweep.csv", sweep_csv(rows));
    write_file(base / "run_info.txt", run_info(config));
}

}  // namespace qtraj
