#include "qtraj/acceptance.hpp"

#include <doctest.h>

using namespace qtraj;

TEST_CASE("mapping identities hold at the derived pulse times") {
    PhysicalParams p = single_atom_reference();
    p.gamma = 0.0;
    const DerivedRates r = derived_rates(p);
    CHECK(single_atom_mapping_error(p, *r.t1, *r.t2) <= 1e-6);

    PhysicalParams m = multi_atom_reference();
    m.gamma = 0.0;
    const DerivedRates rm = derived_rates(m);
    CHECK(multi_atom_mapping_error(m, rm.t3) <= 5.0 * rm.z2 / rm.z3);
}

TEST_CASE("a corrupted t1 formula fails the mapping identity") {
    PhysicalParams p = single_atom_reference();
    p.gamma = 0.0;
    const DerivedRates r = derived_rates(p);
    // pi - arctan replaced by pi + arctan, and a 1% error
    const double wrong = 2.0 / r.omega_kappa * (3.141592653589793 + std::atan(r.omega_kappa / r.kappa));
    CHECK(single_atom_mapping_error(p, wrong, *r.t2) > 1e-6);
    CHECK(single_atom_mapping_error(p, *r.t1 * 1.01, *r.t2) > 1e-6);
    CHECK(single_atom_mapping_error(p, *r.t1, *r.t2 * 0.99) > 1e-6);
    PhysicalParams m = multi_atom_reference();
    m.gamma = 0.0;
    const DerivedRates rm = derived_rates(m);
    CHECK(multi_atom_mapping_error(m, rm.t3 * 1.3) > 5.0 * rm.z2 / rm.z3);
}

TEST_CASE("rank inversions") {
    CHECK(rank_inversions({5, 4, 3, 2, 1}, true) == 0);
    CHECK(rank_inversions({5, 4, 4, 2, 1}, true) == 1);
    CHECK(rank_inversions({4, 5, 3, 2, 1}, true) == 1);
    CHECK(rank_inversions({1, 2, 3, 4, 5}, true) == 10);
    CHECK(rank_inversions({1, 1, 2, 3, 3}, false) == 0);
    CHECK(rank_inversions({1, 3, 2, 4, 5}, false) == 1);
}

TEST_CASE("check registry") {
    const auto& checks = acceptance_checks();
    CHECK(checks.size() == 7);
    for (const auto& c : checks) CHECK_FALSE(c.name.empty());
}
