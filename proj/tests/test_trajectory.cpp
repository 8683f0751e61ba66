#include "qtraj/trajectory.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace qtraj;

namespace {

PhysicalParams single(double kappa, double gamma = 0.0) {
    PhysicalParams p;
    p.delta = p.delta_prime = 300.0;
    p.omega = p.g = 25.0;
    p.kappa = kappa;
    p.gamma = gamma;
    return p;
}

Segment laser_off_wait(const PhysicalParams& p, double cutoff) {
    return {effective_hamiltonian(p, kLasersOff), cutoff, jump_channels(p), true};
}

// |0,1>_A |0,0>_B: one photon in cavity A.
StateVector one_photon(const SpaceLayout& layout) {
    return StateVector::basis(layout, {{{0}, 1}, {{0}, 0}});
}

// RK4 on d psi/dt = -i H psi with a fine fixed step.
double rk4_norm2(const Matrix& h, Vector psi, double t, int steps) {
    const double dt = t / steps;
    const Complex mi(0.0, -1.0);
    for (int s = 0; s < steps; ++s) {
        const Vector k1 = mi * (h * psi);
        const Vector k2 = mi * (h * (psi + 0.5 * dt * k1));
        const Vector k3 = mi * (h * (psi + 0.5 * dt * k2));
        const Vector k4 = mi * (h * (psi + dt * k3));
        psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return psi.squaredNorm();
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct per index") {
    RngStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    std::set<std::uint64_t> firsts;
    for (int i = 0; i < 5; ++i) {
        const std::uint64_t x = a.next_u64();
        CHECK(x == b.next_u64());
        firsts.insert(x);
    }
    CHECK(c.next_u64() != RngStream(7, 3).next_u64());
    CHECK(d.next_u64() != RngStream(7, 3).next_u64());
    RngStream u(1, 0);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double x = u.uniform();
        REQUIRE(x > 0.0);
        REQUIRE(x < 1.0);
        sum += x;
    }
    CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("jump time of a decaying photon is -ln r / (2 kappa)") {
    const PhysicalParams p = single(0.05);
    const double kappa = angular(p.kappa);
    const CompiledSegment seg(laser_off_wait(p, 200.0));
    for (std::uint64_t i = 0; i < 20; ++i) {
        RngStream rng(99, i);
        RngStream copy = rng;
        const double r = copy.uniform();
        const SegmentResult res = seg.evolve(one_photon(p.layout()), rng);
        REQUIRE(res.events.size() == 1);
        const double expected = -std::log(r) / (2.0 * kappa);
        CHECK(res.events[0].time == doctest::Approx(expected).epsilon(1e-8));
        CHECK(res.elapsed == res.events[0].time);
        CHECK(res.stopped);
    }
}

TEST_CASE("a single photon clicks either detector with probability 1/2") {
    const PhysicalParams p = single(0.05);
    const CompiledSegment seg(laser_off_wait(p, 1e4));
    int plus = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        RngStream rng(5, static_cast<std::uint64_t>(i));
        const SegmentResult res = seg.evolve(one_photon(p.layout()), rng);
        REQUIRE(res.events.size() == 1);
        if (res.events[0].epsilon == 1) ++plus;
        // the photon is gone: both cavities empty
        CHECK(std::abs(res.state.amplitude({{{0}, 0}, {{0}, 0}})) == doctest::Approx(1.0));
    }
    CHECK(std::abs(plus / double(n) - 0.5) <= 4.0 * 0.005);
}

TEST_CASE("no-jump norm decay matches fine-step integration") {
    const PhysicalParams p = single(0.05, 0.1);
    const Segment seg{full_hamiltonian(p, kLasersOn), 0.05, jump_channels(p), false};
    const StateVector s = StateVector::basis(p.layout(), {{{1}, 0}, {{1}, 0}});
    const double exact = expectation_norm_decay(s, seg);
    const double oracle = rk4_norm2(seg.generator.to_joint().matrix(), s.amplitudes(), 0.05, 20000);
    CHECK(exact == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(exact < 1.0);
}

TEST_CASE("vacuum without lasers never clicks and the wait times out") {
    const PhysicalParams p = single(0.05);
    const CompiledSegment seg(laser_off_wait(p, 5.0));
    RngStream rng(1, 0);
    const StateVector s = StateVector::basis(p.layout(), {{{1}, 0}, {{1}, 0}});
    const SegmentResult res = seg.evolve(s, rng);
    CHECK(res.events.empty());
    CHECK(res.timed_out);
    CHECK(res.elapsed == 5.0);
    CHECK(std::abs(norm(res.state) - 1.0) < 1e-12);
}

TEST_CASE("norm never rises along no-jump evolution") {
    const PhysicalParams p = single(0.05, 0.1);
    const CompiledSegment seg(
        Segment{full_hamiltonian(p, kLasersOn), 2.0, jump_channels(p), false});
    for (std::uint64_t i = 0; i < 20; ++i) {
        RngStream rng(3, i);
        const SegmentResult res =
            seg.evolve(StateVector::basis(p.layout(), {{{1}, 0}, {{1}, 0}}), rng);
        CHECK(res.max_norm_rise <= 1e-12);
        for (std::size_t k = 1; k < res.events.size(); ++k) {
            CHECK(res.events[k].time >= res.events[k - 1].time);
        }
    }
}

TEST_CASE("segments without channels for the damping are rejected") {
    const PhysicalParams p = single(0.05);
    CHECK_THROWS_AS(CompiledSegment(Segment{full_hamiltonian(p, kLasersOn), 1.0, {}, false}),
                    std::invalid_argument);
    CHECK_THROWS_AS(CompiledSegment(Segment{full_hamiltonian(p, kLasersOn), 1.0, jump_channels(p),
                                            false},
                                    2.0),
                    std::invalid_argument);
}

TEST_CASE("default step") {
    CHECK(default_step(2.0, 0.0) == 0.001);
    CHECK(default_step(2000.0, 1.0) == 0.05);
}

TEST_CASE("evolution over a remainder-length interval agrees with one exact propagator") {
    const PhysicalParams p = single(0.05);
    const Segment seg{effective_hamiltonian(p, kLasersOn), 0.1, jump_channels(p), false};
    const CompiledSegment compiled(seg, 0.03);  // 0.1 = 3 steps + remainder
    const StateVector s = StateVector::basis(p.layout(), {{{1}, 0}, {{1}, 0}});
    // skip draws that would click within 0.1 us
    for (std::uint64_t i = 0; i < 50; ++i) {
        RngStream rng(11, i);
        RngStream copy = rng;
        if (copy.uniform() >= expectation_norm_decay(s, seg)) continue;
        const SegmentResult res = compiled.evolve(s, rng);
        REQUIRE(res.events.empty());
        const Vector expected = propagator(seg.generator, 0.1).to_joint(p.layout()).matrix() *
                                s.amplitudes();
        CHECK((res.state.amplitudes() - expected).norm() <= 1e-12);
        return;
    }
    FAIL("no jump-free draw found");
}
