#include "qtraj/protocol.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qtraj;

namespace {

constexpr double kPi = std::numbers::pi;

PhysicalParams single(double kappa = 0.05, double gamma = 0.0) {
    PhysicalParams p;
    p.delta = p.delta_prime = 300.0;
    p.omega = p.g = 25.0;
    p.kappa = kappa;
    p.gamma = gamma;
    return p;
}

PhysicalParams multi(int n = 3) {
    PhysicalParams p;
    p.delta = 1000.0;
    p.delta_prime = 1000.9;
    p.omega = 30.0;
    p.g = 0.7;
    p.kappa = 0.001;
    p.gamma = 0.1;
    p.atoms_per_cavity = n;
    return p;
}

Vector spectators(int n, int n0) {
    Index dim = 1;
    for (int k = 1; k < n; ++k) dim *= 3;
    Index idx = 0;
    for (int k = 0; k < n - 1; ++k) idx = idx * 3 + (k < n0 ? 0 : 1);
    Vector v = Vector::Zero(dim);
    v[idx] = 1.0;
    return v;
}

// Reduced density matrix of the two designated atoms by explicit summation
// over every joint basis pair, then <Bell|rho|Bell>.
double brute_force_fidelity(const StateVector& s, std::array<int, 2> designated) {
    const SpaceLayout& layout = s.layout();
    Eigen::Matrix<Complex, 9, 9> rho = Eigen::Matrix<Complex, 9, 9>::Zero();
    for (Index i = 0; i < layout.joint_dim(); ++i) {
        const JointLabel li = layout.joint_label(i);
        for (Index j = 0; j < layout.joint_dim(); ++j) {
            JointLabel lj = layout.joint_label(j);
            // traced-out parts must agree
            JointLabel ri = li, rj = lj;
            ri.a.levels[designated[0]] = rj.a.levels[designated[0]] = 0;
            ri.b.levels[designated[1]] = rj.b.levels[designated[1]] = 0;
            if (!(ri == rj)) continue;
            const int row = li.a.levels[designated[0]] * 3 + li.b.levels[designated[1]];
            const int col = lj.a.levels[designated[0]] * 3 + lj.b.levels[designated[1]];
            rho(row, col) += s[i] * std::conj(s[j]);
        }
    }
    Eigen::Matrix<Complex, 9, 1> bell = Eigen::Matrix<Complex, 9, 1>::Zero();
    bell[0 * 3 + 1] = bell[1 * 3 + 0] = 1.0 / std::sqrt(2.0);
    return (bell.adjoint() * rho * bell)(0, 0).real();
}

}  // namespace

TEST_CASE("stage (i) without a click maps |10>|10> to |01>|01>") {
    const ProtocolOne proto(single(), ModelLevel::effective);
    const PairPropagator u =
        propagator(proto.excite_stage().segment().generator, *proto.rates().t1);
    Matrix psi = proto.initial_state().as_matrix();
    Matrix scratch;
    apply_in_place(u, psi, scratch);
    const StateVector s = normalize(StateVector::from_matrix(proto.params().layout(), psi));
    const StateVector target = StateVector::basis(s.layout(), {{{0}, 1}, {{0}, 1}});
    CHECK(std::norm(inner(target, s)) >= 1.0 - 1e-4);

    // one click then leaves the field in (|0>|1> +- |1>|0>)/sqrt2
    for (const auto& ch : jump_channels(proto.params())) {
        const StateVector after = normalize(apply(ch.op, s));
        const StateVector a = StateVector::basis(s.layout(), {{{0}, 0}, {{0}, 1}});
        const StateVector b = StateVector::basis(s.layout(), {{{0}, 1}, {{0}, 0}});
        const StateVector bell = (a * Complex(ch.epsilon()) + b) * (1.0 / std::sqrt(2.0));
        CHECK(std::abs(std::abs(inner(bell, after)) - 1.0) <= 1e-6);
    }
}

TEST_CASE("fidelity agrees with a brute-force partial trace") {
    const PhysicalParams p = multi(2);
    const SpaceLayout layout = p.layout();
    std::mt19937_64 gen(4);
    std::normal_distribution<double> d;
    Vector v(layout.joint_dim());
    for (Index i = 0; i < v.size(); ++i) v[i] = Complex(d(gen), d(gen));
    const StateVector s(layout, v / v.norm());
    for (std::array<int, 2> des : {std::array<int, 2>{0, 0}, {1, 0}, {0, 1}}) {
        MultiAtomSetup setup = MultiAtomSetup::make(2, des, spectators(2, 0), spectators(2, 1));
        CHECK(fidelity(s, &setup) == doctest::Approx(brute_force_fidelity(s, des)).epsilon(1e-12));
    }
    CHECK_THROWS(fidelity(s * Complex(2.0)));
}

TEST_CASE("single-atom fidelity of the target is one") {
    const SpaceLayout layout(1, 1);
    CHECK(fidelity(target_state(layout)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("phase delay") {
    const DerivedRates r = derived_rates(multi());
    auto setup = [](int n0a, int n0b) {
        return MultiAtomSetup::make(3, {0, 0}, spectators(3, n0a), spectators(3, n0b));
    };
    CHECK(phase_delay(1, std::nullopt, r, setup(1, 1)) == 0.0);
    CHECK(phase_delay(-1, std::nullopt, r, setup(2, 2)) ==
          doctest::Approx(kPi / r.delta_r).epsilon(1e-14));
    CHECK_THROWS(phase_delay(0, std::nullopt, r, setup(0, 0)));

    // substitute t_phi back into phi = eps theta(T) exp(-i Delta_r t_phi)
    const Complex i(0.0, 1.0);
    for (int eps : {1, -1}) {
        for (auto [n0a, n0b] : {std::pair{1, 0}, std::pair{0, 2}, std::pair{2, 1}}) {
            for (std::optional<double> tj : {std::optional<double>{}, std::optional<double>{3.7}}) {
                const double t_phi = phase_delay(eps, tj, r, setup(n0a, n0b));
                const double big_t = tj ? 2.0 * r.t3 - *tj : r.t3;
                const Complex phi = double(eps) * std::exp(i * 0.5 * double(n0a - n0b) * r.z2 * big_t) *
                                    std::exp(-i * r.delta_r * t_phi);
                CHECK(std::abs(phi - 1.0) <= 1e-9);
                CHECK(t_phi >= 0.0);
                CHECK(t_phi < 2.0 * kPi / r.delta_r);
            }
        }
    }
}

TEST_CASE("spectator sampling stays inside the N0 families") {
    RngStream rng(2, 0);
    int counts[3] = {0, 0, 0};
    for (int k = 0; k < 300; ++k) {
        const MultiAtomSetup s = sample_spectators(3, rng);
        CHECK(std::abs(s.phi_a.norm() - 1.0) < 1e-12);
        ++counts[s.n0_a];
        // amplitudes only on |11>, |10>, |01>, |00> (indices 4, 3, 1, 0)
        for (Index i : {2, 5, 6, 7, 8}) CHECK(std::abs(s.phi_a[i]) == 0.0);
        if (s.n0_a == 1) CHECK(std::abs(s.phi_a[0]) + std::abs(s.phi_a[4]) == 0.0);
    }
    for (int c : counts) CHECK(c > 60);
    CHECK_THROWS(MultiAtomSetup::make(3, {0, 0}, spectators(3, 0) + spectators(3, 1),
                                      spectators(3, 0)));
}

TEST_CASE("photon cutoff 2 sees no two-photon population in stage (i)") {
    PhysicalParams p = single(0.05, 0.1);
    p.photon_cutoff = 2;
    const ProtocolOne proto(p, ModelLevel::full);
    const StateVector s0 = proto.initial_state();
    const PairPropagator u = propagator(proto.excite_stage().segment().generator, *proto.rates().t1);
    Matrix psi = s0.as_matrix();
    Matrix scratch;
    apply_in_place(u, psi, scratch);
    const StateVector s = StateVector::from_matrix(s0.layout(), psi);
    double leak = 0.0;
    for (Index i = 0; i < s.layout().joint_dim(); ++i) {
        const JointLabel l = s.layout().joint_label(i);
        if (l.a.photons == 2 || l.b.photons == 2) leak += std::norm(s[i]);
    }
    CHECK(leak <= 1e-12);
}

TEST_CASE("effective single-atom protocol produces the Bell state") {
    const ProtocolOne proto(single(0.05), ModelLevel::effective);
    int successes = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        RngStream rng(8, i);
        const ProtocolOutcome o = proto.run(rng);
        if (!o.success) {
            CHECK(o.failure_reason != FailureReason::none);
            CHECK_FALSE(o.fidelity.has_value());
            continue;
        }
        ++successes;
        REQUIRE(o.fidelity);
        CHECK(*o.fidelity >= 1.0 - 1e-9);
        CHECK(o.click_times.size() == 1);
        CHECK((o.epsilon == 1 || o.epsilon == -1));
    }
    CHECK(successes > 170);
}

TEST_CASE("effective multi-atom protocol with fixed spectators") {
    PhysicalParams p = multi();
    p.gamma = 0.0;
    const ProtocolTwo proto(p, ModelLevel::effective);
    const MultiAtomSetup setup = MultiAtomSetup::make(3, {0, 0}, spectators(3, 1), spectators(3, 0));
    int successes = 0;
    for (std::uint64_t i = 0; i < 12; ++i) {
        RngStream rng(4, i);
        const ProtocolOutcome o = proto.run(setup, rng);
        if (!o.success) continue;
        ++successes;
        CHECK(*o.fidelity >= 0.98);
    }
    CHECK(successes >= 8);
    CHECK_THROWS(ProtocolTwo(single(), ModelLevel::effective));
    CHECK_THROWS(ProtocolOne(multi(), ModelLevel::effective));
}
