// model.hpp: physical parameters, derived Raman rates and pulse times, the
// driven Lambda-atom Hamiltonians and the detector/loss jump channels.
//
// Parameters are carried as nu in MHz (angular frequency 2*pi*nu); every
// derived quantity is angular, rad/us, and every time is in us.

#pragma once

#include "qtraj/statespace.hpp"

#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace qtraj {

inline double angular(double mhz) { return 2.0 * std::numbers::pi * mhz; }

struct PhysicalParams {
    double delta = 0.0;        // laser detuning from |1>-|2>, MHz
    double delta_prime = 0.0;  // cavity detuning from |0>-|2>, MHz
    double omega = 0.0;        // laser coupling, MHz
    double g = 0.0;            // cavity coupling, MHz
    double kappa = 0.0;        // cavity field decay, MHz
    double gamma = 0.0;        // excited-state decay, MHz
    int atoms_per_cavity = 1;
    int photon_cutoff = 1;

    // Throws std::invalid_argument on negative rates, non-positive detunings
    // or non-finite values.
    void validate() const;
    SpaceLayout layout() const { return SpaceLayout(atoms_per_cavity, photon_cutoff); }

    bool operator==(const PhysicalParams&) const = default;
};

struct RegimeCheck {
    std::string assumption;  // e.g. "Delta >> Omega"
    double ratio;            // left/right, or relative mismatch for equalities
    bool satisfied;
};

struct DerivedRates {
    double z1 = 0.0;        // Omega^2/Delta
    double z2 = 0.0;        // g^2/Delta'
    double z3 = 0.0;        // Omega g (1/Delta' + 1/Delta) / 2
    double z = 0.0;         // common rate for Omega=g, Delta=Delta' (equals z3)
    double delta_r = 0.0;   // Delta' - Delta
    double kappa = 0.0;     // angular
    double gamma = 0.0;     // angular
    double alpha = 0.0;     // kappa / z3
    double omega_kappa = 0.0;  // sqrt(4 z3^2 - kappa^2)
    std::optional<double> t1;  // single-atom mapping |10> -> |01>
    std::optional<double> t2;  // single-atom mapping |01> -> |10>
    double t3 = 0.0;           // pi / (2 z3)
    std::vector<RegimeCheck> regime;
};

// Throws std::domain_error when 2 z3 <= kappa (no oscillatory mapping pulse).
DerivedRates derived_rates(const PhysicalParams& p);

// Human-readable regime lines, one per assumption.
std::vector<std::string> regime_report(const DerivedRates& rates);

struct Lasers {
    bool a = true;
    bool b = true;

    bool on(Cavity c) const { return c == Cavity::A ? a : b; }
};

inline constexpr Lasers kLasersOn{true, true};
inline constexpr Lasers kLasersOff{false, false};

// Per-cavity Hamiltonians, summed over both cavities as a LocalSum. Only the
// atom at `driven_atom` sees the laser; every atom couples to the cavity.
LocalSum full_hamiltonian(const PhysicalParams& p, Lasers lasers, int driven_atom = 0);
LocalSum effective_hamiltonian(const PhysicalParams& p, Lasers lasers, int driven_atom = 0);

DenseOperator full_cavity_hamiltonian(const PhysicalParams& p, bool laser_on, int driven_atom = 0);
DenseOperator effective_cavity_hamiltonian(const PhysicalParams& p, bool laser_on,
                                           int driven_atom = 0);

struct JumpChannel {
    enum class Kind { detector_plus, detector_minus, atom_loss };

    LocalSum op;
    Kind kind;
    Cavity cavity = Cavity::A;  // atom_loss only
    int atom = 0;               // atom_loss only

    // +1 for D+, -1 for D-, 0 for atom loss.
    int epsilon() const;
    bool is_detector() const { return kind != Kind::atom_loss; }
};

std::string to_string(JumpChannel::Kind k);

// sqrt(kappa)(a_A + a_B), sqrt(kappa)(a_A - a_B), then sqrt(2 gamma)|0><2|_k
// per atom when gamma > 0.
std::vector<JumpChannel> jump_channels(const PhysicalParams& p);

// Sum over channels of C^dagger C, materialized on the joint space.
DenseOperator damping_sum(const std::vector<JumpChannel>& channels);

}  // namespace qtraj
