#include <doctest.h>

#include "naesat/freetree.hpp"

using namespace naesat;

TEST_CASE("single variable tree") {
    SpinTable tab(3, 4);
    FreeTree t = canonicalize(single_variable_tree(3, 4), tab);
    CHECK(t.w_lit == 2);
    CHECK(t.J == 1);
    CHECK(t.ham == mpq_class(1, 2));
    CHECK(t.overlap == 0);
}

TEST_CASE("catalog statistics") {
    for (auto [d, k] : std::vector<std::array<int, 2>>{{2, 3}, {3, 4}}) {
        SpinTable tab(d, k);
        TreeCatalog cat = enumerate_catalog(d, k, 3, tab);
        CHECK(cat.count(1) == 1);
        for (auto& t : cat.trees) {
            CHECK(t.f <= t.v - 1);
            CHECK(tree_size_phi(t, tab) == mpq_class(t.w_lit));
            CHECK(embedding_number_brute(t, tab) == t.J);
            for (long double lam : {0.0L, 1.0L, 0.5L}) CHECK(w_vs_wcom_check(t, tab, lam).ok);
            FreeTree g = flip_boundary(t);
            tree_key(g, tab);
            CHECK(cat.index.count(g.key) == 1);
        }
        MESSAGE("d=" << d << " k=" << k << " trees=" << cat.trees.size());
    }
}
