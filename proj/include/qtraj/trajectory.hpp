// trajectory.hpp: Monte-Carlo wavefunction engine.
//
// A segment is a piecewise-constant stage: a non-Hermitian generator, a
// duration (or a cutoff when waiting for the first click) and the jump
// channels that claim the norm it loses. Evolution draws r ~ U(0,1), steps
// with a cached exact propagator until ||psi||^2 falls to r ||psi_start||^2,
// bisects the crossing on cached half-step propagators, applies a channel
// picked with probability ||C_j psi||^2 / sum_m ||C_m psi||^2, renormalizes and
// redraws.

#pragma once

#include "qtraj/model.hpp"
#include "qtraj/statespace.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace qtraj {

// Reproducible per-trajectory randomness: the sequence is a pure function of
// (master_seed, trajectory_index).
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t trajectory_index);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t trajectory_index() const { return index_; }

    std::uint64_t next_u64() { return engine_(); }
    // Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    // Standard normal (Box-Muller).
    double normal();

private:
    std::uint64_t master_seed_;
    std::uint64_t index_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct JumpEvent {
    double time = 0.0;  // us, relative to the start of the evolved interval
    JumpChannel::Kind kind = JumpChannel::Kind::detector_plus;
    Cavity cavity = Cavity::A;  // atom loss only
    int atom = 0;               // atom loss only
    int epsilon = 0;            // +1 D+, -1 D-, 0 atom loss
};

struct Segment {
    LocalSum generator;
    double duration = 0.0;  // us; the cutoff when until_jump is set
    std::vector<JumpChannel> channels;
    bool until_jump = false;
};

// Called after every jump with all events so far; returning true ends the
// evolution at that jump.
using StopRule = std::function<bool(const std::vector<JumpEvent>&)>;

struct SegmentResult {
    StateVector state;  // renormalized at jumps, otherwise conditioned (norm <= 1)
    std::vector<JumpEvent> events;
    double elapsed = 0.0;
    bool stopped = false;    // ended early by the stop rule or the first jump of a wait
    bool timed_out = false;  // wait segment reached its cutoff without a click
    double max_norm_rise = 0.0;  // largest step-to-step increase of ||psi||^2
};

// Largest diagonal damping rate |Im H_ii| over both cavities.
double max_damping_rate(const LocalSum& generator);

// min(duration / 2000, 0.05 / damping_rate); damping_rate <= 0 drops the
// second bound.
double default_step(double duration, double damping_rate);

// Per-cavity check that sum_j C_j^dagger C_j = i (H - H^dagger) on each
// cavity's diagonal block; returns the max entrywise mismatch.
double sum_rule_residual(const LocalSum& generator, const std::vector<JumpChannel>& channels);

// A segment with its step propagator and bisection half-steps precomputed.
// Immutable once built; one instance serves any number of trajectories.
class CompiledSegment {
public:
    // dt <= 0 selects default_step(duration, max_damping_rate(generator)).
    explicit CompiledSegment(Segment segment, double dt = 0.0);

    const Segment& segment() const { return seg_; }
    double step() const { return dt_; }

    SegmentResult evolve(const StateVector& state, RngStream& rng,
                         const StopRule& stop = {}) const;
    // Same generator and channels, different length (duration >= 0).
    SegmentResult evolve_for(const StateVector& state, RngStream& rng, double duration,
                             const StopRule& stop = {}) const;

private:
    Segment seg_;
    double dt_;
    std::vector<PairPropagator> halvings_;  // halvings_[k] = U(dt / 2^k)
};

SegmentResult evolve_segment(const StateVector& state, const Segment& segment, RngStream& rng,
                             double dt = 0.0, const StopRule& stop = {});

// ||U(duration) psi||^2 / ||psi||^2 without sampling.
double expectation_norm_decay(const StateVector& state, const Segment& segment);

}  // namespace qtraj
