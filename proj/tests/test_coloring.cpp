#include <doctest.h>

#include <set>

#include "naesat/coloring.hpp"
#include "naesat/frozen.hpp"
#include "naesat/instance.hpp"
#include "naesat/oracle.hpp"

using namespace naesat;

namespace {
struct SizeTally {
    int checked = 0, with_free = 0;
};

void check_sizes(const Instance& inst, const std::vector<FrozenConfig>& configs, SpinTable& tab, SizeTally& t) {
    for (auto& fc : configs) {
        if (has_free_cycle(free_structure(inst, fc))) continue;
        CHECK(size_formula(inst, fc, tab) == mpq_class(brute_size(inst, fc)));
        ++t.checked;
        t.with_free += fc.free_count() > 0;
    }
}

std::vector<FrozenConfig> coarsened_solutions(const Instance& inst) {
    std::set<FrozenConfig> out;
    for (auto& x : enumerate_solutions(inst)) out.insert(coarsen_edges(inst, x));
    return {out.begin(), out.end()};
}
}  // namespace

TEST_CASE("size formula equals brute-force extension count") {
    // with d < k no variable can be frozen, so these points only see the all-free configuration
    for (auto [n, d, k] : std::vector<std::array<int, 3>>{{3, 2, 3}, {6, 2, 3}, {4, 3, 4}, {4, 2, 4}}) {
        SpinTable tab(d, k);
        SizeTally t;
        for (uint64_t seed = 1; seed <= 200; ++seed) {
            Instance inst = generate(n, d, k, seed);
            check_sizes(inst, valid_frozen_configs(inst), tab, t);
        }
        MESSAGE("n=" << n << " d=" << d << " k=" << k << " checked=" << t.checked);
    }
    SizeTally sweep;
    for (auto [n, d, k] : std::vector<std::array<int, 3>>{{3, 4, 3}, {6, 4, 3}, {6, 6, 4}}) {
        SpinTable tab(d, k);
        for (uint64_t seed = 1; seed <= 50; ++seed) {
            Instance inst = generate(n, d, k, seed);
            check_sizes(inst, valid_frozen_configs(inst), tab, sweep);
        }
    }
    MESSAGE("full sweeps checked=" << sweep.checked << " with free variables=" << sweep.with_free);
    CHECK(sweep.checked > 0);
    SizeTally coarse;
    for (auto [n, d, k] : std::vector<std::array<int, 3>>{{18, 5, 3}, {21, 5, 3}, {18, 6, 3}, {20, 8, 4}}) {
        SpinTable tab(d, k);
        for (uint64_t seed = 1; seed <= 10; ++seed) {
            Instance inst = generate(n, d, k, seed);
            check_sizes(inst, coarsened_solutions(inst), tab, coarse);
        }
    }
    MESSAGE("coarsened solutions checked=" << coarse.checked << " with free variables=" << coarse.with_free);
    CHECK(coarse.with_free > 0);
}

TEST_CASE("frozen, message and coloring round trips") {
    for (auto [n, d, k] : std::vector<std::array<int, 3>>{{3, 2, 3}, {4, 3, 4}, {4, 2, 4}}) {
        SpinTable tab(d, k);
        Instance inst = generate(n, d, k, 7);
        for (auto& fc : valid_frozen_configs(inst)) {
            if (has_free_cycle(free_structure(inst, fc))) continue;
            Messages msg = build_messages(inst, fc, tab);
            CHECK(local_equation_violation(inst, msg, tab) == -1);
            CHECK(messages_to_frozen(inst, msg, tab) == fc);
            auto col = project_coloring(msg, tab);
            CHECK(check_coloring(inst, col, tab).ok);
            CHECK(coloring_to_messages(inst, col, tab) == msg);
        }
    }
}

TEST_CASE("closed-form vhat matches literal enumeration") {
    for (int k = 2; k <= 6; ++k) {
        std::vector<uint8_t> t(k, 0);
        while (true) {
            CHECK(vhat_closed(t) == vhat_enumerate(t));
            int i = 0;
            while (i < k && t[i] == 4) t[i++] = 0;
            if (i == k) break;
            t[i]++;
        }
        std::vector<uint8_t> forcing(k, B1);
        forcing[0] = R0;
        CHECK(vhat_enumerate(forcing) == mpq_class(1, 1 << (k - 1)));
    }
}

TEST_CASE("component profile accounts for every boundary edge") {
    Instance inst = generate(6, 2, 3, 3);
    for (auto& fc : valid_frozen_configs(inst)) {
        Profile p = component_profile(inst, fc);
        CHECK(p.frozen() == inst.n() - fc.free_count());
        int s = 0;
        for (int c = 0; c < 5; ++c) s += p.Bbar[c];
        CHECK(s == p.boundary_edges());
        CHECK(p.h[3] == p.Bbar[S]);
    }
}
