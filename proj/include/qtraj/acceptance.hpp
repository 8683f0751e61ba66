// acceptance.hpp: the end-to-end acceptance checks, shared by the acceptance
// test binary and `qtraj verify`.

#pragma once

#include "qtraj/model.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace qtraj {

struct VerifyOptions {
    int jobs = 1;
    std::uint64_t seed = 20240601;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceCheck {
    std::string name;
    std::string summary;
    std::function<CheckResult(const VerifyOptions&)> run;
};

const std::vector<AcceptanceCheck>& acceptance_checks();

// Max per-component error of the effective single-atom propagators at t1
// (|10> -> i e^{i z t1} e^{-kappa t1/2} |01>) and t2 (|01> -> ... |10>), plus
// the drift of |00>. Inputs are the pulse times so a corrupted formula can be
// checked.
double single_atom_mapping_error(const PhysicalParams& p, double t1, double t2);

// Max relative error ||U(t3) v - expected|| / ||expected|| of the multi-atom
// mapping relations over N0 = 0..N-1 spectator states, both directions.
double multi_atom_mapping_error(const PhysicalParams& p, double t3);

// |<psi_full|psi_eff>|^2 / (||psi_full||^2 ||psi_eff||^2) after one t1 pulse
// from |10>_A|10>_B.
double full_vs_effective_overlap(const PhysicalParams& p);

// (300; 300; 25; 25) MHz single-atom set and the three-atom (1000; 1000.9; 30; 0.7) set.
PhysicalParams single_atom_reference(double kappa = 0.05, double gamma = 0.1);
PhysicalParams multi_atom_reference();

// Pairs (i < j) that break a monotone ordering: decreasing requires
// values[j] < values[i], non-decreasing requires values[j] >= values[i].
int rank_inversions(const std::vector<double>& values, bool strictly_decreasing);

}  // namespace qtraj
