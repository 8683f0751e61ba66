#include "qtraj/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qtraj {

double p_success_analytic(double alpha) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("p_success_analytic: alpha must be >= 0");
    const double x = alpha * std::numbers::pi;
    return std::exp(-x) * (2.0 - std::exp(-0.5 * x));
}

WilsonInterval wilson_interval(long successes, long n, double z) {
    if (n <= 0 || successes < 0 || successes > n) {
        throw std::invalid_argument("wilson_interval: need 0 <= successes <= n, n > 0");
    }
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

BatchStats aggregate(std::span<const ProtocolOutcome> outcomes) {
    if (outcomes.empty()) throw std::invalid_argument("aggregate: empty batch");
    BatchStats s;
    for (FailureReason f : kAllFailureReasons) s.failure_breakdown[f] = 0;
    std::vector<double> fid;
    for (const auto& o : outcomes) {
        ++s.n_trajectories;
        ++s.failure_breakdown[o.failure_reason];
        if (o.success) {
            ++s.n_success;
            if (o.fidelity) fid.push_back(*o.fidelity);
        }
    }
    s.p_success = static_cast<double>(s.n_success) / static_cast<double>(s.n_trajectories);
    const WilsonInterval ci = wilson_interval(s.n_success, s.n_trajectories);
    s.ci_low = std::min(ci.low, s.p_success);
    s.ci_high = std::max(ci.high, s.p_success);

    if (!fid.empty()) {
        std::sort(fid.begin(), fid.end());
        double sum = 0.0;
        for (double f : fid) sum += f;
        const double mean = sum / static_cast<double>(fid.size());
        double ss = 0.0;
        for (double f : fid) ss += (f - mean) * (f - mean);
        s.mean_fidelity = mean;
        s.fidelity_stderr =
            fid.size() > 1 ? std::sqrt(ss / static_cast<double>(fid.size() - 1) /
                                       static_cast<double>(fid.size()))
                           : 0.0;
    }
    return s;
}

std::vector<ComparisonRow> compare(std::span<const double> alpha_grid,
                                   std::span<const BatchStats> batches) {
    if (alpha_grid.size() != batches.size()) {
        throw std::invalid_argument("compare: alpha grid and batch list differ in length");
    }
    std::vector<ComparisonRow> rows;
    rows.reserve(alpha_grid.size());
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
        const double pa = p_success_analytic(alpha_grid[i]);
        const BatchStats& b = batches[i];
        rows.push_back({alpha_grid[i], pa, b.p_success, b.ci_low, b.ci_high, std::abs(pa - b.p_success)});
    }
    return rows;
}

}  // namespace qtraj
