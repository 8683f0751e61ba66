// experiment.hpp: batch orchestration over trajectories and the frozen CSV
// writers (UTF-8, LF, '.' decimal separator).

#pragma once

#include "qtraj/analytics.hpp"
#include "qtraj/config.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtraj {

// Runs trajectories 0..n-1 of one configuration, `jobs` worker threads.
// Trajectory i draws only from RngStream(seed, i); the result is ordered by
// index and independent of `jobs`.
std::vector<ProtocolOutcome> run_batch(const RunConfig& config, int jobs = 1);

// Configuration at one sweep grid point: alpha sets kappa = alpha z3 / 2pi,
// gamma sets gamma (MHz).
RunConfig at_sweep_point(const RunConfig& config, double value);

struct SweepRow {
    SweepAxis axis;
    double value;
    std::optional<double> p_analytic;  // alpha sweeps only
    BatchStats stats;
};

std::vector<SweepRow> run_sweep(const RunConfig& config, int jobs = 1);

// Header: index,success,failure_reason,epsilon,fidelity,n_clicks,total_time_us
std::string outcomes_csv(const std::vector<ProtocolOutcome>& outcomes);
// Header: n_trajectories,n_success,p_success,ci_low,ci_high,mean_fidelity,
// fidelity_stderr,n_two_photons,n_click_in_stage3,n_spontaneous_emission,n_wait_timeout
std::string summary_csv(const BatchStats& stats);
// Header: axis,value,p_analytic,p_numeric,ci_low,ci_high,mean_fidelity,n_traj
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Resolved config followed by the regime report as comment lines, so the file
// re-parses to the same config.
std::string run_info(const RunConfig& config);

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Writes outcomes.csv, summary.csv and run_info.txt (run) or sweep.csv and
// run_info.txt (sweep) under `dir`. Throws IoError.
void write_run_files(const std::string& dir, const RunConfig& config,
                     const std::vector<ProtocolOutcome>& outcomes);
void write_sweep_files(const std::string& dir, const RunConfig& config,
                       const std::vector<SweepRow>& rows);

}  // namespace qtraj
