#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "naesat/errors.hpp"
#include "naesat/frozen.hpp"
#include "naesat/oracle.hpp"
#include "naesat/rng.hpp"

using namespace naesat;

namespace {
Assignment negated(Assignment x) {
    for (auto& b : x) b ^= 1;
    return x;
}

// connected components of free variables and non-separating clauses by repeated relabelling
std::vector<int> flood_pieces(const Instance& inst, const FrozenConfig& fc) {
    int n = inst.n();
    std::vector<int> label(n);
    std::iota(label.begin(), label.end(), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int a = 0; a < inst.m(); ++a) {
            if (clause_separating(inst, fc, a)) continue;
            int lo = n;
            for (int s = 0; s < inst.k(); ++s) {
                int v = inst.var_of(inst.edge_at(a * inst.k() + s));
                if (fc.labels[v] == kFree) lo = std::min(lo, label[v]);
            }
            for (int s = 0; s < inst.k(); ++s) {
                int v = inst.var_of(inst.edge_at(a * inst.k() + s));
                if (fc.labels[v] == kFree && label[v] != lo) {
                    label[v] = lo;
                    changed = true;
                }
            }
        }
    }
    std::vector<int> out;
    for (int v = 0; v < n; ++v)
        if (fc.labels[v] == kFree) out.push_back(label[v]);
    return out;
}
}  // namespace

TEST_CASE("coarsening commutes with negation and is constant on clusters") {
    for (uint64_t seed = 0; seed < 15; ++seed) {
        auto inst = generate(12, 3, 4, seed);
        auto sols = enumerate_solutions(inst);
        auto census = cluster_census(sols);
        for (auto& cl : census.clusters) {
            auto fc = coarsen(inst, sols[cl.members[0]]);
            // with parallel edges the flip closure can keep a variable that has no forcing edge
            if (!inst.has_parallel_edges()) CHECK(validate_frozen(inst, fc).ok);
            CHECK(coarsen(inst, negated(sols[cl.members[0]])) == negate(fc));
            for (size_t i : cl.members) CHECK(coarsen(inst, sols[i]) == fc);
        }
    }
}

TEST_CASE("coarsening does not depend on the scan order") {
    auto inst = generate(12, 3, 4, 4);
    auto sols = enumerate_solutions(inst);
    REQUIRE(!sols.empty());
    Rng rng(8);
    for (size_t s = 0; s < std::min<size_t>(sols.size(), 10); ++s) {
        auto fc = coarsen(inst, sols[s]);
        std::vector<int> order(inst.n());
        std::iota(order.begin(), order.end(), 0);
        for (int t = 0; t < 100; ++t) {
            rng.shuffle(order);
            CHECK(coarsen(inst, sols[s], order) == fc);
        }
        CHECK(coarsen_edges(inst, sols[s]) == fc);
    }
}

TEST_CASE("coarsening refuses non-solutions") {
    Instance inst(3, 1, 3, {0, 1, 2}, {0, 0, 0});
    CHECK_THROWS_AS(coarsen(inst, {0, 0, 0}), InputError);
}

TEST_CASE("clause classification") {
    // one clause over three variables, d = 1
    Instance inst(3, 1, 3, {0, 1, 2}, {0, 0, 0});
    FrozenConfig mixed{{0, 1, kFree}};
    CHECK(clause_separating(inst, mixed, 0));
    FrozenConfig all_free{{kFree, kFree, kFree}};
    CHECK_FALSE(clause_separating(inst, all_free, 0));
    // other two values equal to 0 force the third to 1
    FrozenConfig forced{{0, 0, 1}};
    CHECK(is_forcing(inst, forced, 2));
    CHECK_FALSE(is_forcing(inst, mixed, 0));
    // classification needs a valid configuration; variable 0 above has no forcing edge
    CHECK_THROWS_AS(classify_clauses(inst, forced), ValidationError);
    auto big = generate(12, 3, 4, 1);
    for (auto& x : enumerate_solutions(big)) {
        auto fc = coarsen_edges(big, x);
        auto cls = classify_clauses(big, fc);
        for (int i = 0; i < big.edges(); ++i)
            if (cls.forcing[i]) CHECK(cls.separating[big.clause_of(i)]);
    }
}

TEST_CASE("free structure") {
    Instance inst(3, 1, 3, {0, 1, 2}, {0, 0, 0});
    SUBCASE("single free variable next to a separating clause") {
        FrozenConfig fc{{0, 1, kFree}};
        auto fs = free_structure(inst, fc);
        REQUIRE(fs.pieces.size() == 1);
        CHECK(fs.pieces[0].v() == 1);
        CHECK(fs.pieces[0].f() == 0);
        CHECK(fs.pieces[0].s_boundary.size() == 1);
        CHECK(fs.pieces[0].gamma() == -1);
    }
    SUBCASE("all frozen") {
        FrozenConfig fc{{0, 1, 1}};
        CHECK(free_structure(inst, fc).pieces.empty());
    }
}

TEST_CASE("free pieces against flood fill and boundary counts") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        auto inst = generate(12, 3, 4, seed);
        auto sols = enumerate_solutions(inst);
        auto census = cluster_census(sols);
        for (auto& cl : census.clusters) {
            auto fc = coarsen(inst, cl.representative);
            auto fs = free_structure(inst, fc);
            auto flood = flood_pieces(inst, fc);
            std::vector<int> ours;
            for (int v = 0; v < inst.n(); ++v)
                if (fc.labels[v] == kFree) ours.push_back(fs.piece_of_var[v]);
            REQUIRE(ours.size() == flood.size());
            for (size_t i = 0; i < ours.size(); ++i)
                for (size_t j = 0; j < ours.size(); ++j) CHECK((ours[i] == ours[j]) == (flood[i] == flood[j]));
            for (size_t p = 0; p < fs.pieces.size(); ++p) {
                auto& pc = fs.pieces[p];
                int pi = static_cast<int>(p);
                CHECK(fs.eta(inst, fc, pi, 0) + fs.eta(inst, fc, pi, 1) == static_cast<int>(pc.b_boundary.size()));
                CHECK(fs.eta(inst, fc, pi, 2) == static_cast<int>(pc.s_boundary.size()));
                for (int a : pc.clauses) {
                    int free_nb = 0;
                    for (int s = 0; s < inst.k(); ++s) free_nb += fc.labels[inst.var_of(inst.edge_at(a * inst.k() + s))] == kFree;
                    CHECK(free_nb >= 2);
                }
            }
            CHECK(extension_count(inst, fc, fs) == brute_size(inst, fc));
            CHECK(extension_count(inst, fc, fs) == cl.size);
        }
    }
}

TEST_CASE("cycle counts") {
    FreeStructure fs;
    CHECK_FALSE(has_free_cycle(fs));
    CHECK(multicyclic_edge_count(fs) == 0);
    Piece uni;
    uni.vars = {0, 1};
    uni.clauses = {0, 1};
    uni.internal = {0, 1, 2, 3};
    fs.pieces = {uni};
    CHECK(has_free_cycle(fs));
    CHECK(multicyclic_edge_count(fs) == 0);
    Piece multi = uni;
    multi.internal = {0, 1, 2, 3, 4};
    fs.pieces = {multi};
    CHECK(multicyclic_edge_count(fs) == 1);
}

TEST_CASE("validity against exhaustive labelling") {
    auto inst = generate(6, 2, 3, 1);
    auto valid = valid_frozen_configs(inst);
    auto sols = enumerate_solutions(inst);
    // every coarsened solution is among the valid configurations
    for (auto& x : sols) CHECK(std::find(valid.begin(), valid.end(), coarsen(inst, x)) != valid.end());
    // turning a frozen variable with a forcing witness free breaks validity
    for (auto& fc : valid) {
        auto cls = classify_clauses(inst, fc);
        for (int i = 0; i < inst.edges(); ++i) {
            if (!cls.forcing[i]) continue;
            FrozenConfig g = fc;
            g.labels[inst.var_of(i)] = kFree;
            CHECK_FALSE(validate_frozen(inst, g).ok);
        }
    }
}
