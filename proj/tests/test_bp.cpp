#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "naesat/bp.hpp"
#include "naesat/errors.hpp"
#include "naesat/exact.hpp"

using namespace naesat;

namespace {

struct Setup {
    int d, k;
    std::unique_ptr<SpinTable> tab;
    TreeCatalog cat;
    std::map<int, BpSpace> spaces;
};

Setup& setup(int k) {
    static std::map<int, Setup> cache;
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;
    Setup s;
    s.k = k;
    s.d = band_degree(k);
    s.tab = std::make_unique<SpinTable>(s.d, k);
    s.cat = enumerate_catalog(s.d, k, 3, *s.tab);
    for (int L = 1; L <= 3; ++L) s.spaces.emplace(L, build_space(*s.tab, L));
    return cache.emplace(k, std::move(s)).first->second;
}

BpParams params(const Setup& s, int L, long double lambda) {
    BpParams p;
    p.d = s.d;
    p.k = s.k;
    p.L = L;
    p.lambda = lambda;
    return p;
}

}  // namespace

TEST_CASE("band degrees") {
    CHECK(band_degree(9) == 1591);
    CHECK(band_degree(10) == 3542);
    CHECK(band_degree(11) == 7800);
}

TEST_CASE("one step from the all-B measure by hand at k=3, d=2, L=1") {
    SpinTable tab(2, 3);
    auto sp = build_space(tab, 1);
    REQUIRE(sp.dots.size() == 1);
    DotMeasure q;
    q.r = 0;
    q.b = 0.5L;
    q.free = {0};
    // lambda = 0: hatted (R0, B0, S) = (1/4, 0, 1/2); dotted (R0, B0, free) = (1/6, 1/6, 1/3)
    auto s0 = bp_step(sp, q, 0);
    CHECK(fabsl(s0.hat.r - 0.25L) < 1e-15L);
    CHECK(fabsl(s0.hat.b) < 1e-15L);
    CHECK(fabsl(s0.hat.s - 0.5L) < 1e-15L);
    CHECK(fabsl(s0.dot.r - 1.0L / 6) < 1e-15L);
    CHECK(fabsl(s0.dot.b - 1.0L / 6) < 1e-15L);
    CHECK(fabsl(s0.dot.free[0] - 1.0L / 3) < 1e-15L);
    // lambda = 1: hatted (1/6, 0, 2/3); dotted (1/8, 1/8, 1/2)
    auto s1 = bp_step(sp, q, 1);
    CHECK(fabsl(s1.hat.r - 1.0L / 6) < 1e-15L);
    CHECK(fabsl(s1.hat.s - 2.0L / 3) < 1e-15L);
    CHECK(fabsl(s1.dot.r - 0.125L) < 1e-15L);
    CHECK(fabsl(s1.dot.free[0] - 0.5L) < 1e-15L);
}

TEST_CASE("bp_step output is a symmetric probability measure") {
    auto& s = setup(9);
    for (int L = 1; L <= 3; ++L) {
        auto& sp = s.spaces.at(L);
        auto out = bp_step(sp, spread_init(sp), 0.5L);
        CHECK(fabsl(out.dot.mass() - 1) < 1e-12L);
        CHECK(fabsl(out.hat.mass() - 1) < 1e-12L);
        for (size_t i = 0; i < sp.dots.size(); ++i) CHECK(out.dot.free[i] == out.dot.free[sp.dots[i].flip]);
        for (auto& x : sp.dots) CHECK(x.v <= L);
        for (auto& x : sp.hats) CHECK(x.v <= L);
    }
}

TEST_CASE("fixed points at k = 9, 10, 11 and L = 1, 2, 3") {
    for (int k : {9, 10, 11}) {
        auto& s = setup(k);
        for (int L = 1; L <= 3; ++L)
            for (long double lambda : {0.0L, 0.5L, 1.0L}) {
                auto& sp = s.spaces.at(L);
                auto pt = solve_point(sp, s.cat, *s.tab, params(s, L, lambda));
                auto a = audit_point(pt, s.cat);
                INFO("k=" << k << " L=" << L << " lambda=" << static_cast<double>(lambda) << " failed: " << a.failures());
                CHECK(a.ok());
                // refeeding the fixed point moves it by less than tol
                auto again = bp_step(sp, pt.state.qdot, lambda);
                CHECK(l1_distance(again.dot, pt.state.qdot) <= 1e-12L);
                CHECK(pt.theta.theta[1] == pt.theta.theta[2]);
                CHECK(pt.theta.theta[4] == 0);
                CHECK(pt.profile.h[1] == pt.profile.h[2]);
                auto ps = p_star(pt.profile, s.cat);
                CHECK(ps.in_range);
                CHECK(fabsl(ps.p_star - ps.p_star_alt) < 1e-12L);
            }
    }
}

TEST_CASE("single free variable tree by hand") {
    auto& s = setup(9);
    auto& sp = s.spaces.at(2);
    auto pt = solve_point(sp, s.cat, *s.tab, params(s, 2, 0.5L));
    long double sum = 0;
    for (size_t i = 0; i < s.cat.trees.size(); ++i)
        if (s.cat.trees[i].v == 1) sum += pt.profile.p_tree[i];
    const auto& st = pt.state;
    long double lhand = 0.5L * logl(2.0L) + s.d * (logl(st.qhat.s) - 0.5L * logl(2.0L)) - pt.profile.z.log_zbar -
                        st.log_Zdot;
    CHECK(fabsl(sum / expl(lhand) - 1) < 1e-12L);
}

TEST_CASE("two starts reach the same fixed point at k = 9") {
    auto& s = setup(9);
    for (int L = 1; L <= 3; ++L) {
        auto& sp = s.spaces.at(L);
        auto p = params(s, L, 0.5L);
        auto a = solve_fixed_point(sp, p, near_frozen_init(sp));
        auto b = solve_fixed_point(sp, p, spread_init(sp));
        CHECK(l1_distance(a.qdot, b.qdot) < 10 * p.tol);
    }
}

TEST_CASE("replica symmetric bound at k=3, d=2") {
    CHECK(fabsl(f_rs(2, 3) - (logl(2.0L) + 2.0L / 3 * logl(0.75L))) < 1e-15L);
}

TEST_CASE("lambda star at k = 9") {
    auto& s = setup(9);
    auto& sp = s.spaces.at(3);
    auto p = params(s, 3, 0);
    auto ls = lambda_star(sp, s.cat, *s.tab, p, 1e-6L);
    CHECK(ls.flag == "crossing");
    CHECK(ls.monotone);
    CHECK(ls.lambda_star > 0);
    CHECK(ls.lambda_star < 1);
    CHECK(fabsl(ls.c_star - 1 / (2 * ls.lambda_star)) < 1e-15L);
    auto ls2 = lambda_star(sp, s.cat, *s.tab, p, 5e-7L);
    CHECK(fabsl(ls2.lambda_star - ls.lambda_star) <= 1e-6L);
    // s* recomputed at lambda*
    p.lambda = ls.lambda_star;
    auto pt = solve_point(sp, s.cat, *s.tab, p);
    CHECK(fabsl(pt.profile.s_star - ls.s_star) < 1e-12L);
    auto ps = p_star(pt.profile, s.cat);
    CHECK(ps.tail_bound > 0);
    CHECK(ps.tail_bound < 1e-4L);
}

TEST_CASE("below the band there is no crossing") {
    int k = 9;
    int d = static_cast<int>(k * (ldexpl(1.0L, k - 1) - 2) * logl(2.0L)) - 10;
    SpinTable tab(d, k);
    auto cat = enumerate_catalog(d, k, 2, tab);
    auto sp = build_space(tab, 2);
    BpParams p;
    p.d = d;
    p.k = k;
    p.L = 2;
    auto ls = lambda_star(sp, cat, tab, p);
    CHECK(ls.flag == "no_crossing_positive");
}

TEST_CASE("guards") {
    auto& s = setup(9);
    auto& sp = s.spaces.at(3);
    auto p = params(s, 3, 0.5L);
    p.max_iter = 3;
    CHECK_THROWS_AS(solve_fixed_point(sp, p), ValidationError);
    p.max_iter = 500;
    auto st = solve_fixed_point(sp, p);
    SpinTable tab(s.d, s.k);
    auto small = enumerate_catalog(s.d, s.k, 2, tab);
    CHECK_THROWS_AS(optimal_profiles(sp, st, small, tab), InputError);
    p.L = 2;
    CHECK_THROWS_AS(solve_fixed_point(sp, p), ConfigError);
}

TEST_CASE("reports") {
    auto& s = setup(9);
    auto& sp = s.spaces.at(1);
    auto pt = solve_point(sp, s.cat, *s.tab, params(s, 1, 0.5L));
    std::string row = sweep_csv_row(pt, "crossing");
    CHECK(std::count(row.begin(), row.end(), ',') == 15);
    std::string header = sweep_csv_header();
    CHECK(std::count(header.begin(), header.end(), ',') == 15);
    LambdaStar ls;
    ls.lambda_star = 0.5L;
    ls.s_star = 0.1L;
    ls.c_star = 1;
    ls.flag = "crossing";
    PStar ps;
    ps.p_star = 0.9L;
    ps.tail_bound = 1e-5L;
    std::string j = constants_json(ls, ps, 3);
    CHECK(j.find("\"lambda_star\":0.5") != std::string::npos);
    CHECK(j.find("\"L\":3") != std::string::npos);
}
