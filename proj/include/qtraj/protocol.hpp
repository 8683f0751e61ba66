// protocol.hpp: the single-atom and multi-atom entangling protocols as stage
// machines over the trajectory engine, plus Bell-target fidelity.

#pragma once

#include "qtraj/model.hpp"
#include "qtraj/statespace.hpp"
#include "qtraj/trajectory.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace qtraj {

enum class ModelLevel { full, effective };

enum class FailureReason { none, two_photons, click_in_stage3, spontaneous_emission, wait_timeout };

std::string to_string(ModelLevel m);
std::string to_string(FailureReason f);
ModelLevel parse_model_level(const std::string& s);

inline constexpr std::array<FailureReason, 5> kAllFailureReasons = {
    FailureReason::none, FailureReason::two_photons, FailureReason::click_in_stage3,
    FailureReason::spontaneous_emission, FailureReason::wait_timeout};

struct ProtocolOutcome {
    bool success = false;
    FailureReason failure_reason = FailureReason::none;
    int epsilon = 0;  // +1, -1, or 0 when no detector click was kept
    std::optional<double> fidelity;  // successful trajectories only
    std::vector<double> click_times;  // detector clicks, us from protocol start
    double total_time = 0.0;
    double max_norm_rise = 0.0;  // diagnostic: largest no-jump norm^2 increase
};

struct ProtocolOptions {
    double t_wait_multiple = 8.0;  // wait cutoff = multiple / kappa
    double dt = 0.0;               // <= 0: per-stage default step
};

// Spectator configuration for the multi-atom protocol. phi_a/phi_b are
// states of the non-designated atoms (ascending site order, designated atom
// skipped), so their length is 3^(N-1).
struct MultiAtomSetup {
    std::array<int, 2> designated{0, 0};
    Vector phi_a;
    Vector phi_b;
    int n0_a = 0;
    int n0_b = 0;

    // Validates normalization (1e-12) and that every populated branch has the
    // same number of spectators in |0>, which becomes n0_a / n0_b.
    static MultiAtomSetup make(int atoms_per_cavity, std::array<int, 2> designated, Vector phi_a,
                               Vector phi_b);
};

// N0 uniform on {0..N-1}; |Phi> Haar-random on the spectator states with
// exactly N0 atoms in |0> and the rest in |1>. For N=3 this is the family
// {|11>, c1|10> + c2|01>, |00>}.
MultiAtomSetup sample_spectators(int atoms_per_cavity, RngStream& rng, int designated = 0);

// |Phi> (x) |designated level, photons> for one cavity.
Vector cavity_state(const SpaceLayout& layout, int designated, const Vector& phi, int level,
                    int photons);

// Delay of laser B in the storage stage so that the relative phase of the
// two branches is 1. click_time is set for a stage-(i) click and empty for a
// stage-(ii) click.
double phase_delay(int epsilon, std::optional<double> click_time, const DerivedRates& rates,
                   const MultiAtomSetup& setup);

// (|0>_A|1>_B + |1>_A|0>_B)/sqrt(2) with both cavities empty (N = 1).
StateVector target_state(const SpaceLayout& layout);

// Without a setup: |<Bell, vacuum|psi>|^2 (N = 1). With a setup: <Bell|rho|Bell>
// for the reduced state of the two designated atoms. psi must be normalized.
double fidelity(const StateVector& final_state, const MultiAtomSetup* setup = nullptr);

class ProtocolOne {
public:
    ProtocolOne(const PhysicalParams& p, ModelLevel level, ProtocolOptions options = {});

    const PhysicalParams& params() const { return params_; }
    const DerivedRates& rates() const { return rates_; }
    const ProtocolOptions& options() const { return options_; }
    StateVector initial_state() const;

    const CompiledSegment& excite_stage() const { return excite_; }
    const CompiledSegment& wait_stage() const { return wait_; }
    const CompiledSegment& store_stage() const { return store_; }

    ProtocolOutcome run(RngStream& rng) const;

private:
    PhysicalParams params_;
    ModelLevel level_;
    ProtocolOptions options_;
    DerivedRates rates_;
    CompiledSegment excite_;
    CompiledSegment wait_;
    CompiledSegment store_;
};

class ProtocolTwo {
public:
    ProtocolTwo(const PhysicalParams& p, ModelLevel level, ProtocolOptions options = {},
                std::array<int, 2> designated = {0, 0});

    const PhysicalParams& params() const { return params_; }
    const DerivedRates& rates() const { return rates_; }
    std::array<int, 2> designated() const { return designated_; }
    StateVector initial_state(const MultiAtomSetup& setup) const;

    // Evolution under a fixed laser pattern (a, b) for the t3-based step.
    const CompiledSegment& pattern(bool a, bool b) const { return patterns_[(a ? 2 : 0) + (b ? 1 : 0)]; }
    const CompiledSegment& wait_stage() const { return wait_; }

    ProtocolOutcome run(const MultiAtomSetup& setup, RngStream& rng) const;

private:
    PhysicalParams params_;
    ModelLevel level_;
    ProtocolOptions options_;
    std::array<int, 2> designated_;
    DerivedRates rates_;
    std::vector<CompiledSegment> patterns_;  // index (a?2:0)+(b?1:0)
    CompiledSegment wait_;
};

ProtocolOutcome run_protocol_one(const PhysicalParams& p, ModelLevel level, RngStream& rng,
                                 ProtocolOptions options = {});
ProtocolOutcome run_protocol_two(const PhysicalParams& p, const MultiAtomSetup& setup,
                                 ModelLevel level, RngStream& rng, ProtocolOptions options = {});

}  // namespace qtraj
