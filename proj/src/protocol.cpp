#include "qtraj/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qtraj {

std::string to_string(ModelLevel m) { return m == ModelLevel::full ? "full" : "effective"; }

std::string to_string(FailureReason f) {
    switch (f) {
        case FailureReason::none: return "none";
        case FailureReason::two_photons: return "two_photons";
        case FailureReason::click_in_stage3: return "click_in_stage3";
        case FailureReason::spontaneous_emission: return "spontaneous_emission";
        case FailureReason::wait_timeout: return "wait_timeout";
    }
    return "unknown";
}

ModelLevel parse_model_level(const std::string& s) {
    if (s == "full") return ModelLevel::full;
    if (s == "effective") return ModelLevel::effective;
    throw std::invalid_argument("unknown model level '" + s + "' (full|effective)");
}

namespace {

DenseOperator cavity_hamiltonian(const PhysicalParams& p, ModelLevel level, bool laser_on,
                                 int driven) {
    return level == ModelLevel::full ? full_cavity_hamiltonian(p, laser_on, driven)
                                     : effective_cavity_hamiltonian(p, laser_on, driven);
}

LocalSum hamiltonian(const PhysicalParams& p, ModelLevel level, Lasers lasers,
                     std::array<int, 2> driven) {
    return {cavity_hamiltonian(p, level, lasers.a, driven[0]),
            cavity_hamiltonian(p, level, lasers.b, driven[1])};
}

double stage_step(const ProtocolOptions& opt, const DerivedRates& r, double duration) {
    if (opt.dt > 0.0) return std::min(opt.dt, duration);
    return default_step(duration, std::max(r.kappa, r.gamma));
}

double wait_cutoff(const ProtocolOptions& opt, const DerivedRates& r) {
    if (!(r.kappa > 0.0)) throw std::invalid_argument("protocol: kappa must be > 0");
    if (!(opt.t_wait_multiple > 0.0)) throw std::invalid_argument("protocol: t_wait_multiple <= 0");
    return opt.t_wait_multiple / r.kappa;
}

CompiledSegment compile(const PhysicalParams& p, ModelLevel level, Lasers lasers,
                        std::array<int, 2> driven, double duration, double step,
                        bool until_jump = false) {
    Segment seg{hamiltonian(p, level, lasers, driven), duration, jump_channels(p), until_jump};
    return CompiledSegment(std::move(seg), step);
}

int detector_clicks(const std::vector<JumpEvent>& events) {
    return static_cast<int>(std::count_if(events.begin(), events.end(),
                                          [](const JumpEvent& e) { return e.epsilon != 0; }));
}

bool has_loss(const std::vector<JumpEvent>& events) {
    return std::any_of(events.begin(), events.end(),
                       [](const JumpEvent& e) { return e.kind == JumpChannel::Kind::atom_loss; });
}

// Excitation stage: a second click or any spontaneous emission ends it.
bool excitation_stop(const std::vector<JumpEvent>& events) {
    return has_loss(events) || detector_clicks(events) >= 2;
}

bool any_event(const std::vector<JumpEvent>&) { return true; }

void record_clicks(ProtocolOutcome& out, const std::vector<JumpEvent>& events, double offset) {
    for (const auto& e : events) {
        if (e.epsilon != 0) out.click_times.push_back(offset + e.time);
    }
}

ProtocolOutcome fail(ProtocolOutcome out, FailureReason why, double total_time) {
    out.success = false;
    out.failure_reason = why;
    out.total_time = total_time;
    out.fidelity.reset();
    return out;
}

int first_epsilon(const std::vector<JumpEvent>& events) {
    for (const auto& e : events) {
        if (e.epsilon != 0) return e.epsilon;
    }
    return 0;
}

// Multiply every amplitude whose designated atom in cavity A sits in |1> by -1.
StateVector flip_sign_on_a(const StateVector& s, int designated_a) {
    const SpaceLayout& layout = s.layout();
    Vector v = s.amplitudes();
    const Index d = layout.cavity_dim();
    for (Index ia = 0; ia < d; ++ia) {
        if (layout.cavity_label(ia).levels[static_cast<std::size_t>(designated_a)] != 1) continue;
        v.segment(ia * d, d) *= -1.0;
    }
    return {layout, std::move(v)};
}

constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

// ------------------------------- MultiAtomSetup ------------------------------

namespace {

Index spectator_dim(int atoms_per_cavity) {
    Index d = 1;
    for (int k = 1; k < atoms_per_cavity; ++k) d *= kLevelsPerAtom;
    return d;
}

// Levels of the spectators for a spectator-basis index (ascending site order).
std::vector<int> spectator_levels(int atoms_per_cavity, Index idx) {
    std::vector<int> levels(static_cast<std::size_t>(atoms_per_cavity - 1), 0);
    for (int k = atoms_per_cavity - 2; k >= 0; --k) {
        levels[static_cast<std::size_t>(k)] = static_cast<int>(idx % kLevelsPerAtom);
        idx /= kLevelsPerAtom;
    }
    return levels;
}

int zeros_in(const std::vector<int>& levels) {
    return static_cast<int>(std::count(levels.begin(), levels.end(), 0));
}

int common_n0(int atoms_per_cavity, const Vector& phi, const char* which) {
    if (phi.size() != spectator_dim(atoms_per_cavity)) {
        throw std::invalid_argument(std::string("MultiAtomSetup: ") + which +
                                    " has wrong length for the spectator space");
    }
    if (std::abs(phi.norm() - 1.0) > 1e-12) {
        throw std::invalid_argument(std::string("MultiAtomSetup: ") + which + " is not normalized");
    }
    int n0 = -1;
    for (Index i = 0; i < phi.size(); ++i) {
        if (std::abs(phi[i]) <= 1e-14) continue;
        const int z = zeros_in(spectator_levels(atoms_per_cavity, i));
        if (n0 >= 0 && z != n0) {
            throw std::invalid_argument(std::string("MultiAtomSetup: ") + which +
                                        " mixes branches with different N0");
        }
        n0 = z;
    }
    return n0;
}

}  // namespace

MultiAtomSetup MultiAtomSetup::make(int atoms_per_cavity, std::array<int, 2> designated,
                                    Vector phi_a, Vector phi_b) {
    if (atoms_per_cavity < 1) throw std::invalid_argument("MultiAtomSetup: atoms_per_cavity < 1");
    for (int d : designated) {
        if (d < 0 || d >= atoms_per_cavity) {
            throw std::invalid_argument("MultiAtomSetup: designated atom out of range");
        }
    }
    MultiAtomSetup s;
    s.designated = designated;
    s.n0_a = common_n0(atoms_per_cavity, phi_a, "phi_a");
    s.n0_b = common_n0(atoms_per_cavity, phi_b, "phi_b");
    s.phi_a = std::move(phi_a);
    s.phi_b = std::move(phi_b);
    return s;
}

MultiAtomSetup sample_spectators(int atoms_per_cavity, RngStream& rng, int designated) {
    const int spectators = atoms_per_cavity - 1;
    const Index dim = spectator_dim(atoms_per_cavity);
    auto draw = [&]() {
        const int n0 = std::min(spectators, static_cast<int>(rng.uniform() * (spectators + 1)));
        Vector phi = Vector::Zero(dim);
        for (Index i = 0; i < dim; ++i) {
            const auto levels = spectator_levels(atoms_per_cavity, i);
            const bool in_family = std::all_of(levels.begin(), levels.end(),
                                               [](int l) { return l == 0 || l == 1; });
            if (in_family && zeros_in(levels) == n0) phi[i] = Complex(rng.normal(), rng.normal());
        }
        if (dim == 1) phi[0] = 1.0;
        return Vector(phi / phi.norm());
    };
    Vector phi_a = draw();
    Vector phi_b = draw();
    return MultiAtomSetup::make(atoms_per_cavity, {designated, designated}, std::move(phi_a),
                                std::move(phi_b));
}

Vector cavity_state(const SpaceLayout& layout, int designated, const Vector& phi, int level,
                    int photons) {
    const int n = layout.atoms_per_cavity();
    if (phi.size() != spectator_dim(n)) {
        throw std::invalid_argument("cavity_state: spectator state has wrong length");
    }
    Vector v = Vector::Zero(layout.cavity_dim());
    for (Index i = 0; i < phi.size(); ++i) {
        if (phi[i] == Complex(0.0)) continue;
        const auto spect = spectator_levels(n, i);
        CavityLabel label;
        label.photons = photons;
        for (int k = 0, s = 0; k < n; ++k) {
            label.levels.push_back(k == designated ? level : spect[static_cast<std::size_t>(s++)]);
        }
        v[layout.cavity_index(label)] += phi[i];
    }
    return v;
}

// -------------------------------- Phase delay --------------------------------

double phase_delay(int epsilon, std::optional<double> click_time, const DerivedRates& rates,
                   const MultiAtomSetup& setup) {
    if (epsilon != 1 && epsilon != -1) throw std::invalid_argument("phase_delay: epsilon must be +-1");
    const double theta_time = click_time ? 2.0 * rates.t3 - *click_time : rates.t3;
    const double phase = (epsilon < 0 ? std::numbers::pi : 0.0) +
                         0.5 * static_cast<double>(setup.n0_a - setup.n0_b) * rates.z2 * theta_time;
    const double two_pi = 2.0 * std::numbers::pi;
    // delta_r * t_phi == phase (mod 2 pi), smallest t_phi >= 0
    const double signed_phase = rates.delta_r >= 0.0 ? phase : -phase;
    double wrapped = std::fmod(signed_phase, two_pi);
    if (wrapped < 0.0) wrapped += two_pi;
    if (two_pi - wrapped < 1e-12) wrapped = 0.0;
    if (wrapped == 0.0) return 0.0;
    if (rates.delta_r == 0.0) {
        throw std::domain_error("phase_delay: Delta_r = 0 cannot cancel a nontrivial phase");
    }
    return wrapped / std::abs(rates.delta_r);
}

// --------------------------------- Fidelity ----------------------------------

StateVector target_state(const SpaceLayout& layout) {
    if (layout.atoms_per_cavity() != 1) {
        throw std::invalid_argument("target_state: defined for one atom per cavity");
    }
    const StateVector a = StateVector::basis(layout, {{{0}, 0}, {{1}, 0}});
    const StateVector b = StateVector::basis(layout, {{{1}, 0}, {{0}, 0}});
    return (a + b) * kInvSqrt2;
}

double fidelity(const StateVector& final_state, const MultiAtomSetup* setup) {
    const double n = norm(final_state);
    if (std::abs(n - 1.0) > 1e-9) throw std::invalid_argument("fidelity: state is not normalized");
    const SpaceLayout& layout = final_state.layout();
    if (setup == nullptr) {
        return std::norm(inner(target_state(layout), final_state));
    }
    // <Bell| rho_red |Bell> = sum over the traced-out configuration r of
    // |sum_{ab} Bell*_{ab} psi_{ab,r}|^2. Bell has amplitude 1/sqrt2 on
    // (0,1) and (1,0) of the designated pair.
    const auto [da, db] = setup->designated;
    const Index d = layout.cavity_dim();
    // Key each cavity index by (designated level, rest index).
    auto split = [&](Index i, int designated, int& level) {
        CavityLabel label = layout.cavity_label(i);
        level = label.levels[static_cast<std::size_t>(designated)];
        label.levels[static_cast<std::size_t>(designated)] = 0;
        return layout.cavity_index(label);
    };
    std::vector<int> level_a(static_cast<std::size_t>(d)), level_b(static_cast<std::size_t>(d));
    std::vector<Index> rest_a(static_cast<std::size_t>(d)), rest_b(static_cast<std::size_t>(d));
    for (Index i = 0; i < d; ++i) {
        rest_a[static_cast<std::size_t>(i)] = split(i, da, level_a[static_cast<std::size_t>(i)]);
        rest_b[static_cast<std::size_t>(i)] = split(i, db, level_b[static_cast<std::size_t>(i)]);
    }
    Matrix projected = Matrix::Zero(d, d);  // indexed by (rest_a, rest_b)
    const Matrix psi = final_state.as_matrix();
    for (Index ia = 0; ia < d; ++ia) {
        const int la = level_a[static_cast<std::size_t>(ia)];
        if (la > 1) continue;
        for (Index ib = 0; ib < d; ++ib) {
            const int lb = level_b[static_cast<std::size_t>(ib)];
            if (lb + la != 1) continue;
            projected(rest_a[static_cast<std::size_t>(ia)], rest_b[static_cast<std::size_t>(ib)]) +=
                kInvSqrt2 * psi(ia, ib);
        }
    }
    return projected.squaredNorm();
}

// -------------------------------- ProtocolOne --------------------------------

namespace {

DerivedRates protocol_one_rates(const PhysicalParams& p) {
    if (p.atoms_per_cavity != 1) throw std::invalid_argument("protocol one: one atom per cavity");
    DerivedRates r = derived_rates(p);
    if (!r.t1 || !r.t2) {
        throw std::invalid_argument("protocol one: needs Omega = g and Delta = Delta'");
    }
    return r;
}

}  // namespace

ProtocolOne::ProtocolOne(const PhysicalParams& p, ModelLevel level, ProtocolOptions options)
    : params_(p),
      level_(level),
      options_(options),
      rates_(protocol_one_rates(p)),
      excite_(compile(p, level, kLasersOn, {0, 0}, *rates_.t1, stage_step(options, rates_, *rates_.t1))),
      wait_(compile(p, level, kLasersOff, {0, 0}, wait_cutoff(options, rates_),
                    stage_step(options, rates_, wait_cutoff(options, rates_)), true)),
      store_(compile(p, level, kLasersOn, {0, 0}, *rates_.t2, stage_step(options, rates_, *rates_.t2))) {}

StateVector ProtocolOne::initial_state() const {
    return StateVector::basis(params_.layout(), {{{1}, 0}, {{1}, 0}});
}

ProtocolOutcome ProtocolOne::run(RngStream& rng) const {
    ProtocolOutcome out;
    double clock = 0.0;

    // (i) both lasers on for t1
    SegmentResult r1 = excite_.evolve(initial_state(), rng, excitation_stop);
    record_clicks(out, r1.events, clock);
    out.max_norm_rise = std::max(out.max_norm_rise, r1.max_norm_rise);
    clock += r1.elapsed;
    if (has_loss(r1.events)) return fail(out, FailureReason::spontaneous_emission, clock);
    const int clicks = detector_clicks(r1.events);
    if (clicks >= 2) return fail(out, FailureReason::two_photons, clock);

    StateVector psi = r1.state;
    if (clicks == 1) {
        out.epsilon = first_epsilon(r1.events);
    } else {
        // (ii) lasers off, wait for the click
        SegmentResult r2 = wait_.evolve(psi, rng);
        record_clicks(out, r2.events, clock);
        out.max_norm_rise = std::max(out.max_norm_rise, r2.max_norm_rise);
        clock += r2.elapsed;
        if (r2.timed_out) return fail(out, FailureReason::wait_timeout, clock);
        if (has_loss(r2.events)) return fail(out, FailureReason::spontaneous_emission, clock);
        out.epsilon = first_epsilon(r2.events);
        psi = r2.state;
    }

    // (iii) lasers on for t2; any jump spoils the stored state
    SegmentResult r3 = store_.evolve(psi, rng, any_event);
    record_clicks(out, r3.events, clock);
    out.max_norm_rise = std::max(out.max_norm_rise, r3.max_norm_rise);
    clock += r3.elapsed;
    if (has_loss(r3.events)) return fail(out, FailureReason::spontaneous_emission, clock);
    if (!r3.events.empty()) return fail(out, FailureReason::click_in_stage3, clock);

    // (iv) ideal phase correction for a D- click
    psi = r3.state;
    if (out.epsilon < 0) psi = flip_sign_on_a(psi, 0);

    out.success = true;
    out.total_time = clock;
    out.fidelity = fidelity(normalize(psi));
    return out;
}

// -------------------------------- ProtocolTwo --------------------------------

namespace {

DerivedRates protocol_two_rates(const PhysicalParams& p, std::array<int, 2> designated) {
    for (int d : designated) {
        if (d < 0 || d >= p.atoms_per_cavity) {
            throw std::invalid_argument("protocol two: designated atom out of range");
        }
    }
    DerivedRates r = derived_rates(p);
    if (std::abs(r.delta_r - r.z1) > 1e-6 * std::abs(r.z1)) {
        throw std::invalid_argument("protocol two: needs Delta_r = z1 (relative tolerance 1e-6)");
    }
    return r;
}

}  // namespace

ProtocolTwo::ProtocolTwo(const PhysicalParams& p, ModelLevel level, ProtocolOptions options,
                         std::array<int, 2> designated)
    : params_(p),
      level_(level),
      options_(options),
      designated_(designated),
      rates_(protocol_two_rates(p, designated)),
      wait_(compile(p, level, kLasersOff, designated, wait_cutoff(options, rates_),
                    stage_step(options, rates_, wait_cutoff(options, rates_)), true)) {
    const double step = stage_step(options, rates_, rates_.t3);
    for (int idx = 0; idx < 4; ++idx) {
        const Lasers lasers{(idx & 2) != 0, (idx & 1) != 0};
        patterns_.push_back(compile(p, level, lasers, designated, rates_.t3, step));
    }
}

StateVector ProtocolTwo::initial_state(const MultiAtomSetup& setup) const {
    const SpaceLayout layout = params_.layout();
    return StateVector::product(layout, cavity_state(layout, designated_[0], setup.phi_a, 1, 0),
                                cavity_state(layout, designated_[1], setup.phi_b, 1, 0));
}

ProtocolOutcome ProtocolTwo::run(const MultiAtomSetup& setup, RngStream& rng) const {
    if (setup.designated != designated_) {
        throw std::invalid_argument("protocol two: setup designates different atoms");
    }
    ProtocolOutcome out;
    double clock = 0.0;
    const double t3 = rates_.t3;

    // (i) designated atoms illuminated for t3
    SegmentResult r1 = pattern(true, true).evolve_for(initial_state(setup), rng, t3, excitation_stop);
    record_clicks(out, r1.events, clock);
    out.max_norm_rise = std::max(out.max_norm_rise, r1.max_norm_rise);
    clock += r1.elapsed;
    if (has_loss(r1.events)) return fail(out, FailureReason::spontaneous_emission, clock);
    const int clicks = detector_clicks(r1.events);
    if (clicks >= 2) return fail(out, FailureReason::two_photons, clock);

    StateVector psi = r1.state;
    std::optional<double> click_time;
    if (clicks == 1) {
        out.epsilon = first_epsilon(r1.events);
        click_time = out.click_times.front();
    } else {
        // (ii) wait for one photon decay
        SegmentResult r2 = wait_.evolve(psi, rng);
        record_clicks(out, r2.events, clock);
        out.max_norm_rise = std::max(out.max_norm_rise, r2.max_norm_rise);
        clock += r2.elapsed;
        if (r2.timed_out) return fail(out, FailureReason::wait_timeout, clock);
        if (has_loss(r2.events)) return fail(out, FailureReason::spontaneous_emission, clock);
        out.epsilon = first_epsilon(r2.events);
        psi = r2.state;
    }

    // (iii) L_A on for [0, t3], L_B on for [t_phi, t_phi + t3]
    const double t_phi = phase_delay(out.epsilon, click_time, rates_, setup);
    std::vector<double> marks = {0.0, t3, t_phi, t_phi + t3};
    std::sort(marks.begin(), marks.end());
    for (std::size_t k = 0; k + 1 < marks.size(); ++k) {
        const double start = marks[k];
        const double length = marks[k + 1] - start;
        if (length <= 1e-12 * t3) continue;
        const bool a_on = start < t3;
        const bool b_on = start >= t_phi && start < t_phi + t3;
        SegmentResult r = pattern(a_on, b_on).evolve_for(psi, rng, length, any_event);
        record_clicks(out, r.events, clock);
        out.max_norm_rise = std::max(out.max_norm_rise, r.max_norm_rise);
        clock += r.elapsed;
        if (has_loss(r.events)) return fail(out, FailureReason::spontaneous_emission, clock);
        if (!r.events.empty()) return fail(out, FailureReason::click_in_stage3, clock);
        psi = r.state;
    }

    out.success = true;
    out.total_time = clock;
    out.fidelity = fidelity(normalize(psi), &setup);
    return out;
}

ProtocolOutcome run_protocol_one(const PhysicalParams& p, ModelLevel level, RngStream& rng,
                                 ProtocolOptions options) {
    return ProtocolOne(p, level, options).run(rng);
}

ProtocolOutcome run_protocol_two(const PhysicalParams& p, const MultiAtomSetup& setup,
                                 ModelLevel level, RngStream& rng, ProtocolOptions options) {
    return ProtocolTwo(p, level, options, setup.designated).run(setup, rng);
}

}  // namespace qtraj
