#include "qtraj/analytics.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace qtraj;

TEST_CASE("closed-form success probability") {
    CHECK(p_success_analytic(0.0) == 1.0);
    CHECK(p_success_analytic(0.024) == doctest::Approx(0.9616844918445907).epsilon(1e-13));
    CHECK(p_success_analytic(0.04764) == doctest::Approx(0.9230749016036247).epsilon(1e-13));
    CHECK(p_success_analytic(0.04764046655195638) ==
          doctest::Approx(0.9230741341305061).epsilon(1e-13));
    CHECK_THROWS_AS(p_success_analytic(-0.1), std::invalid_argument);
    double last = 1.0;
    for (double a = 0.01; a < 1.0; a += 0.01) {
        const double p = p_success_analytic(a);
        CHECK(p < last);
        last = p;
    }
}

TEST_CASE("Wilson interval") {
    const auto full = wilson_interval(100, 100);
    CHECK(full.low == doctest::Approx(0.9630065017930143).epsilon(1e-12));
    CHECK(full.high == doctest::Approx(1.0).epsilon(1e-14));
    const auto mid = wilson_interval(940, 1000);
    CHECK(mid.low == doctest::Approx(0.9235289252086434).epsilon(1e-12));
    CHECK(mid.high == doctest::Approx(0.953103527324068).epsilon(1e-12));
    const auto none = wilson_interval(0, 10);
    CHECK(none.low == doctest::Approx(0.0));
    CHECK(none.high == doctest::Approx(0.2775327998628892).epsilon(1e-12));
    CHECK_THROWS(wilson_interval(3, 0));
    CHECK_THROWS(wilson_interval(11, 10));
}

TEST_CASE("aggregate counts outcomes and is order independent") {
    std::vector<ProtocolOutcome> outcomes;
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.9, 1.0);
    for (int i = 0; i < 50; ++i) {
        ProtocolOutcome o;
        if (i % 5 == 0) {
            o.failure_reason = i % 10 == 0 ? FailureReason::two_photons : FailureReason::wait_timeout;
        } else {
            o.success = true;
            o.fidelity = u(gen);
        }
        outcomes.push_back(o);
    }
    const BatchStats s = aggregate(outcomes);
    CHECK(s.n_trajectories == 50);
    CHECK(s.n_success == 40);
    CHECK(s.p_success == 0.8);
    CHECK(s.failure_breakdown.at(FailureReason::two_photons) == 5);
    CHECK(s.failure_breakdown.at(FailureReason::wait_timeout) == 5);
    CHECK(s.failure_breakdown.at(FailureReason::click_in_stage3) == 0);
    CHECK(s.failure_breakdown.at(FailureReason::none) == 40);
    REQUIRE(s.mean_fidelity);
    const auto w = wilson_interval(40, 50);
    CHECK(s.ci_low == w.low);
    CHECK(s.ci_high == w.high);

    for (int k = 0; k < 5; ++k) {
        std::shuffle(outcomes.begin(), outcomes.end(), gen);
        const BatchStats t = aggregate(outcomes);
        CHECK(*t.mean_fidelity == *s.mean_fidelity);
        CHECK(*t.fidelity_stderr == *s.fidelity_stderr);
    }
    CHECK_THROWS(aggregate(std::span<const ProtocolOutcome>{}));
}

TEST_CASE("no successes leaves fidelity empty") {
    std::vector<ProtocolOutcome> outcomes(3);
    for (auto& o : outcomes) o.failure_reason = FailureReason::spontaneous_emission;
    const BatchStats s = aggregate(outcomes);
    CHECK(s.n_success == 0);
    CHECK_FALSE(s.mean_fidelity.has_value());
}

TEST_CASE("comparison rows") {
    BatchStats b;
    b.n_trajectories = 100;
    b.n_success = 96;
    b.p_success = 0.96;
    const std::vector<double> grid = {0.024};
    const std::vector<BatchStats> batches = {b};
    const auto rows = compare(grid, batches);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].abs_gap == doctest::Approx(std::abs(0.96 - p_success_analytic(0.024))));
    const std::vector<double> two = {0.1, 0.2};
    CHECK_THROWS(compare(two, batches));
}
