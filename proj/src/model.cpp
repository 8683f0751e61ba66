#include "qtraj/model.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qtraj {

namespace {

// Ratio threshold that counts as "much greater than".
constexpr double kMuchGreater = 10.0;

RegimeCheck much_greater(std::string name, double big, double small) {
    const double ratio = small > 0.0 ? big / small : INFINITY;
    return {std::move(name), ratio, ratio >= kMuchGreater};
}

}  // namespace

void PhysicalParams::validate() const {
    const double values[] = {delta, delta_prime, omega, g, kappa, gamma};
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("PhysicalParams: non-finite rate");
    }
    if (!(delta > 0.0) || !(delta_prime > 0.0)) {
        throw std::invalid_argument("PhysicalParams: delta and delta_prime must be > 0");
    }
    if (omega < 0.0 || g < 0.0 || kappa < 0.0 || gamma < 0.0) {
        throw std::invalid_argument("PhysicalParams: rates must be >= 0");
    }
    if (atoms_per_cavity < 1) throw std::invalid_argument("PhysicalParams: atoms_per_cavity < 1");
    if (photon_cutoff < 1) throw std::invalid_argument("PhysicalParams: photon_cutoff < 1");
}

DerivedRates derived_rates(const PhysicalParams& p) {
    p.validate();
    DerivedRates r;
    const double delta = angular(p.delta);
    const double delta_p = angular(p.delta_prime);
    const double omega = angular(p.omega);
    const double g = angular(p.g);
    r.kappa = angular(p.kappa);
    r.gamma = angular(p.gamma);

    r.z1 = omega * omega / delta;
    r.z2 = g * g / delta_p;
    r.z3 = 0.5 * omega * g * (1.0 / delta_p + 1.0 / delta);
    r.z = r.z3;
    r.delta_r = delta_p - delta;

    if (!(2.0 * r.z3 > r.kappa)) {
        throw std::domain_error("derived_rates: 2 z3 <= kappa, no oscillatory mapping pulse");
    }
    r.alpha = r.kappa / r.z3;
    r.omega_kappa = std::sqrt(4.0 * r.z3 * r.z3 - r.kappa * r.kappa);
    r.t3 = std::numbers::pi / (2.0 * r.z3);

    if (p.omega == p.g && p.delta == p.delta_prime) {
        const double phase = std::atan2(r.omega_kappa, r.kappa);
        r.t1 = 2.0 / r.omega_kappa * (std::numbers::pi - phase);
        r.t2 = 2.0 / r.omega_kappa * phase;
    }

    r.regime.push_back(much_greater("Delta >> Omega", delta, omega));
    r.regime.push_back(much_greater("Delta' >> g", delta_p, g));
    r.regime.push_back(much_greater("Delta >> gamma", delta, r.gamma));
    r.regime.push_back(much_greater("Delta' >> gamma", delta_p, r.gamma));
    r.regime.push_back(much_greater("z3 >> kappa", r.z3, r.kappa));
    r.regime.push_back(
        much_greater("kappa >> gamma Omega^2/Delta^2", r.kappa, r.gamma * omega * omega / (delta * delta)));
    r.regime.push_back(
        much_greater("kappa >> gamma g^2/Delta'^2", r.kappa, r.gamma * g * g / (delta_p * delta_p)));
    if (p.atoms_per_cavity > 1) {
        r.regime.push_back(much_greater("Omega >> g", omega, g));
        const double mismatch = std::abs(r.delta_r - r.z1) / std::max(std::abs(r.z1), 1e-300);
        r.regime.push_back({"Delta_r = z1", mismatch, mismatch <= 1e-6});
    }
    return r;
}

std::vector<std::string> regime_report(const DerivedRates& rates) {
    std::vector<std::string> lines;
    for (const auto& c : rates.regime) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: ratio=%.6g %s", c.assumption.c_str(), c.ratio,
                      c.satisfied ? "satisfied" : "VIOLATED");
        lines.emplace_back(buf);
    }
    return lines;
}

// ------------------------------- Hamiltonians --------------------------------

namespace {

void check_driven(const PhysicalParams& p, int driven_atom) {
    if (driven_atom < 0 || driven_atom >= p.atoms_per_cavity) {
        throw std::invalid_argument("hamiltonian: driven atom index out of range");
    }
}

}  // namespace

DenseOperator full_cavity_hamiltonian(const PhysicalParams& p, bool laser_on, int driven_atom) {
    p.validate();
    check_driven(p, driven_atom);
    const SpaceLayout layout = p.layout();
    const double delta = angular(p.delta);
    const double delta_r = angular(p.delta_prime) - delta;
    const double omega = angular(p.omega);
    const double g = angular(p.g);
    const double kappa = angular(p.kappa);
    const double gamma = angular(p.gamma);
    const Complex i(0.0, 1.0);

    const Site mode = Site::mode_of(Cavity::A);
    const DenseOperator a = embed(annihilator(p.photon_cutoff), mode, layout);
    const DenseOperator n = a.adjoint() * a;

    DenseOperator h = n * (-i * kappa);
    for (int k = 0; k < p.atoms_per_cavity; ++k) {
        const Site atom = Site::atom_at(Cavity::A, k);
        h = h + embed(flip(2, 2), atom, layout) * Complex(delta, -gamma);
        h = h + embed(flip(0, 0), atom, layout) * (-delta_r);
        const DenseOperator cav = a * embed(flip(2, 0), atom, layout) * g;
        h = h + cav + cav.adjoint();
        if (laser_on && k == driven_atom) {
            const DenseOperator drive = embed(flip(2, 1), atom, layout) * omega;
            h = h + drive + drive.adjoint();
        }
    }
    return h;
}

DenseOperator effective_cavity_hamiltonian(const PhysicalParams& p, bool laser_on,
                                           int driven_atom) {
    check_driven(p, driven_atom);
    const DerivedRates r = derived_rates(p);
    const SpaceLayout layout = p.layout();
    const Complex i(0.0, 1.0);

    const DenseOperator a = embed(annihilator(p.photon_cutoff), Site::mode_of(Cavity::A), layout);
    const DenseOperator n = a.adjoint() * a;

    DenseOperator h = n * (-i * r.kappa);
    for (int k = 0; k < p.atoms_per_cavity; ++k) {
        const Site atom = Site::atom_at(Cavity::A, k);
        const DenseOperator s00 = embed(flip(0, 0), atom, layout);
        h = h + s00 * (-r.delta_r) + n * s00 * (-r.z2);
        if (laser_on && k == driven_atom) {
            h = h + embed(flip(1, 1), atom, layout) * (-r.z1);
            const DenseOperator raman = a * embed(flip(1, 0), atom, layout) * (-r.z3);
            h = h + raman + raman.adjoint();
        }
    }
    return h;
}

LocalSum full_hamiltonian(const PhysicalParams& p, Lasers lasers, int driven_atom) {
    return {full_cavity_hamiltonian(p, lasers.a, driven_atom),
            full_cavity_hamiltonian(p, lasers.b, driven_atom)};
}

LocalSum effective_hamiltonian(const PhysicalParams& p, Lasers lasers, int driven_atom) {
    return {effective_cavity_hamiltonian(p, lasers.a, driven_atom),
            effective_cavity_hamiltonian(p, lasers.b, driven_atom)};
}

// ------------------------------- Jump channels -------------------------------

int JumpChannel::epsilon() const {
    switch (kind) {
        case Kind::detector_plus: return 1;
        case Kind::detector_minus: return -1;
        case Kind::atom_loss: return 0;
    }
    return 0;
}

std::string to_string(JumpChannel::Kind k) {
    switch (k) {
        case JumpChannel::Kind::detector_plus: return "detector_plus";
        case JumpChannel::Kind::detector_minus: return "detector_minus";
        case JumpChannel::Kind::atom_loss: return "atom_loss";
    }
    return "unknown";
}

std::vector<JumpChannel> jump_channels(const PhysicalParams& p) {
    p.validate();
    const SpaceLayout layout = p.layout();
    const Index d = layout.cavity_dim();
    const Matrix zero = Matrix::Zero(d, d);
    const Matrix a =
        embed(annihilator(p.photon_cutoff), Site::mode_of(Cavity::A), layout).matrix() *
        std::sqrt(angular(p.kappa));

    std::vector<JumpChannel> out;
    out.push_back({LocalSum(layout, a, a), JumpChannel::Kind::detector_plus});
    out.push_back({LocalSum(layout, a, -a), JumpChannel::Kind::detector_minus});
    if (p.gamma > 0.0) {
        const double amp = std::sqrt(2.0 * angular(p.gamma));
        for (Cavity c : {Cavity::A, Cavity::B}) {
            for (int k = 0; k < p.atoms_per_cavity; ++k) {
                const Matrix loss =
                    embed(flip(0, 2), Site::atom_at(Cavity::A, k), layout).matrix() * amp;
                LocalSum op = c == Cavity::A ? LocalSum(layout, loss, zero)
                                             : LocalSum(layout, zero, loss);
                out.push_back({std::move(op), JumpChannel::Kind::atom_loss, c, k});
            }
        }
    }
    return out;
}

DenseOperator damping_sum(const std::vector<JumpChannel>& channels) {
    if (channels.empty()) throw std::invalid_argument("damping_sum: no channels");
    DenseOperator sum = DenseOperator::zero(channels.front().op.layout(), DenseOperator::Scope::joint);
    for (const auto& ch : channels) {
        const DenseOperator c = ch.op.to_joint();
        sum = sum + c.adjoint() * c;
    }
    return sum;
}

}  // namespace qtraj
