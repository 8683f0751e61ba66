#include "qtraj/model.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qtraj;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

PhysicalParams fig3(double kappa, double gamma = 0.0) {
    PhysicalParams p;
    p.delta = p.delta_prime = 300.0;
    p.omega = p.g = 25.0;
    p.kappa = kappa;
    p.gamma = gamma;
    return p;
}

PhysicalParams multi() {
    PhysicalParams p;
    p.delta = 1000.0;
    p.delta_prime = 1000.9;
    p.omega = 30.0;
    p.g = 0.7;
    p.kappa = 0.001;
    p.gamma = 0.1;
    p.atoms_per_cavity = 3;
    return p;
}

}  // namespace

// Reference values from an independent scipy evaluation; t1 was confirmed by
// a brentq root search on the |10> amplitude of the effective propagator.
TEST_CASE("derived rates at the single-atom parameters") {
    const DerivedRates r = derived_rates(fig3(0.05));
    CHECK(r.z / kTwoPi == doctest::Approx(2.0833333333333).epsilon(1e-12));
    CHECK(r.z1 == doctest::Approx(r.z).epsilon(1e-14));
    CHECK(r.z3 == doctest::Approx(r.z).epsilon(1e-14));
    CHECK(r.alpha == doctest::Approx(0.024).epsilon(1e-12));
    CHECK(r.delta_r == 0.0);
    REQUIRE(r.t1);
    REQUIRE(r.t2);
    CHECK(*r.t1 == doctest::Approx(0.12092546142189821).epsilon(1e-12));
    CHECK(*r.t2 == doctest::Approx(0.11909182044456575).epsilon(1e-12));
    CHECK(*r.t1 >= *r.t2);
}

TEST_CASE("derived rates at the multi-atom parameters") {
    const DerivedRates r = derived_rates(multi());
    CHECK(r.z1 / kTwoPi == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(r.delta_r / kTwoPi == doctest::Approx(0.9000000000000368).epsilon(1e-10));
    CHECK(r.z2 / kTwoPi == doctest::Approx(0.0004895593965431112).epsilon(1e-10));
    CHECK(r.z3 / kTwoPi == doctest::Approx(0.020990558497352384).epsilon(1e-10));
    CHECK(r.t3 == doctest::Approx(11.910116637989095).epsilon(1e-10));
    CHECK(r.alpha == doctest::Approx(0.04764046655195638).epsilon(1e-10));
    CHECK_FALSE(r.t1.has_value());
    CHECK_FALSE(r.t2.has_value());
    for (const auto& check : r.regime) CHECK_MESSAGE(check.satisfied, check.assumption);
    CHECK(regime_report(r).size() == r.regime.size());
}

TEST_CASE("derived rates reject non-oscillatory and invalid parameters") {
    CHECK_THROWS_AS(derived_rates(fig3(10.0)), std::domain_error);
    PhysicalParams p = fig3(0.05);
    p.delta = 0.0;
    CHECK_THROWS(derived_rates(p));
    p = fig3(0.05);
    p.gamma = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("full cavity Hamiltonian matches hand enumeration") {
    // index = level * 2 + photons
    PhysicalParams p = fig3(0.05, 0.1);
    p.delta_prime = 301.0;
    const double d = angular(p.delta), dr = angular(p.delta_prime - p.delta);
    const double w = angular(p.omega), g = angular(p.g), k = angular(p.kappa), gm = angular(p.gamma);
    Matrix h = Matrix::Zero(6, 6);
    h(0, 0) = -dr;
    h(1, 1) = Complex(-dr, -k);
    h(2, 2) = 0.0;
    h(3, 3) = Complex(0.0, -k);
    h(4, 4) = Complex(d, -gm);
    h(5, 5) = Complex(d, -gm - k);
    h(4, 1) = h(1, 4) = g;  // |2,0> <-> |0,1>
    Matrix off = h;
    off(4, 2) = off(2, 4) = w;  // |2,0> <-> |1,0>
    off(5, 3) = off(3, 5) = w;  // |2,1> <-> |1,1>
    CHECK((full_cavity_hamiltonian(p, true).matrix() - off).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((full_cavity_hamiltonian(p, false).matrix() - h).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("effective cavity Hamiltonian matches hand enumeration") {
    const PhysicalParams p = fig3(0.05);
    const DerivedRates r = derived_rates(p);
    Matrix h = Matrix::Zero(6, 6);
    h(1, 1) = Complex(-r.z2, -r.kappa);
    h(2, 2) = -r.z1;
    h(3, 3) = Complex(-r.z1, -r.kappa);
    h(5, 5) = Complex(0.0, -r.kappa);
    h(2, 1) = h(1, 2) = -r.z3;  // |1,0> <-> |0,1>
    CHECK((effective_cavity_hamiltonian(p, true).matrix() - h).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("jump channels account for the damping") {
    for (int n : {1, 2}) {
        PhysicalParams p = fig3(0.05, 0.1);
        p.atoms_per_cavity = n;
        const auto channels = jump_channels(p);
        CHECK(channels.size() == static_cast<std::size_t>(2 + 2 * n));
        const Matrix h = full_hamiltonian(p, kLasersOn).to_joint().matrix();
        const Matrix expected = Complex(0.0, 1.0) * (h - h.adjoint());
        CHECK((damping_sum(channels).matrix() - expected).cwiseAbs().maxCoeff() <= 1e-12);
    }
    const auto lossless = jump_channels(fig3(0.05, 0.0));
    CHECK(lossless.size() == 2);
    CHECK(lossless[0].epsilon() == 1);
    CHECK(lossless[1].epsilon() == -1);
}

TEST_CASE("only the driven atom sees the laser") {
    PhysicalParams p = multi();
    const Matrix on0 = full_cavity_hamiltonian(p, true, 0).matrix();
    const Matrix on2 = full_cavity_hamiltonian(p, true, 2).matrix();
    const Matrix off = full_cavity_hamiltonian(p, false, 0).matrix();
    const SpaceLayout layout = p.layout();
    const Index from = layout.cavity_index({{1, 1, 1}, 0});
    CHECK(std::abs(on0(layout.cavity_index({{2, 1, 1}, 0}), from)) > 0.0);
    CHECK(std::abs(on2(layout.cavity_index({{2, 1, 1}, 0}), from)) == 0.0);
    CHECK(std::abs(on2(layout.cavity_index({{1, 1, 2}, 0}), from)) > 0.0);
    CHECK((off - full_cavity_hamiltonian(p, false, 2).matrix()).norm() == 0.0);
    CHECK_THROWS(full_cavity_hamiltonian(p, true, 3));
}
