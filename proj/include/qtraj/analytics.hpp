// analytics.hpp: closed-form success law, batch statistics and
// analytic-vs-numeric comparison rows.

#pragma once

#include "qtraj/protocol.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace qtraj {

// exp(-alpha pi) (2 - exp(-alpha pi / 2)), alpha = kappa / z.
double p_success_analytic(double alpha);

struct WilsonInterval {
    double low;
    double high;
};

// 95% Wilson score interval for `successes` out of `n`.
WilsonInterval wilson_interval(long successes, long n, double z = 1.959963984540054);

struct BatchStats {
    long n_trajectories = 0;
    long n_success = 0;
    double p_success = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::optional<double> mean_fidelity;  // over successes
    std::optional<double> fidelity_stderr;
    std::map<FailureReason, long> failure_breakdown;  // every reason, including none

    double ci_half_width() const { return 0.5 * (ci_high - ci_low); }
};

// Order-independent: fidelities are summed in sorted order.
BatchStats aggregate(std::span<const ProtocolOutcome> outcomes);

struct ComparisonRow {
    double alpha;
    double p_analytic;
    double p_numeric;
    double ci_low;
    double ci_high;
    double abs_gap;
};

std::vector<ComparisonRow> compare(std::span<const double> alpha_grid,
                                   std::span<const BatchStats> batches);

}  // namespace qtraj
