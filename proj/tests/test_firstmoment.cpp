#include <doctest.h>

#include <cmath>
#include <iostream>

#include "naesat/firstmoment.hpp"
#include "naesat/oracle.hpp"

using namespace naesat;

namespace {
void check_point(int n, int d, int k, const mpq_class& expected_total) {
    auto o = restricted_oracle(n, d, k, {0.0L, 1.0L, 0.5L});
    auto reps = verify_first_moment(o, 1e-10L);
    for (auto& r : reps) {
        INFO("n=" << n << " d=" << d << " k=" << k << " lambda=" << static_cast<double>(r.lambda));
        CHECK(r.profiles_checked > 0);
        CHECK(r.exact_matches == r.profiles_checked);
        CHECK(r.ok);
    }
    CHECK(o.total_exact[1] == expected_total);
    CHECK(o.total_exact[1] == *exact_expected_partition(n, d, k, 1).exact);
    for (auto& [key, e] : o.entries) CHECK(check_compatibility(e.profile).ok);
}
}  // namespace

TEST_CASE("restricted product formula matches enumeration at (3,2,3)") { check_point(3, 2, 3, mpq_class(9, 2)); }

TEST_CASE("restricted product formula matches enumeration at (2,2,4)") { check_point(2, 2, 4, mpq_class(7, 2)); }

TEST_CASE("Stirling prefactor on a synthetic profile") {
    BoundaryProfile B;
    B.n = 20;
    B.d = 3;
    B.k = 3;
    B.m = 20;
    B.Bdot = {{"022", 10}, {"133", 10}};
    B.Bhat = {{"033", 10}, {"122", 10}};
    B.Bbar = {10, 10, 20, 20, 0};
    auto pc = psi_circ(B);
    long double ratio = expl(pc.log_exact - (B.n * pc.psi - pc.log_p));
    INFO("ratio " << static_cast<double>(ratio));
    CHECK(ratio >= 0.5L);
    CHECK(ratio <= 2.0L);
    CHECK(pc.kappa > 0);
}

TEST_CASE("restricted product formula matches enumeration at (2,3,3)") {
    check_point(2, 3, 3, *exact_expected_partition(2, 3, 3, 1).exact);
}
