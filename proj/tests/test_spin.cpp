#include <doctest.h>

#include "naesat/errors.hpp"
#include "naesat/spin.hpp"

using namespace naesat;

TEST_CASE("leaf spins and flips") {
    SpinTable tab(3, 3);
    CHECK(tab.flip(tab.d0()) == tab.d1());
    CHECK(tab.flip(tab.h1()) == tab.h0());
    CHECK(tab.flip(tab.hs()) == tab.hs());
    CHECK(tab.flip(tab.dstar()) == tab.dstar());
    CHECK(tab[tab.hs()].z == 2);
    CHECK(tab[tab.hs()].v == 1);
    CHECK(tab[tab.dstar()].star);
    CHECK(tab.literal_flip(tab.d0(), 0) == tab.d0());
    CHECK(tab.literal_flip(tab.d0(), 1) == tab.d1());
}

TEST_CASE("hat map") {
    SpinTable tab(3, 3);
    CHECK(tab.hat_map(std::vector<int>{tab.d1(), tab.d1()}) == tab.h0());
    CHECK(tab.hat_map(std::vector<int>{tab.d0(), tab.d0()}) == tab.h1());
    CHECK(tab.hat_map(std::vector<int>{tab.d0(), tab.d1()}) == tab.hs());
    CHECK(tab.hat_map(std::vector<int>{tab.d0(), tab.dstar()}) == tab.hstar());
    CHECK_THROWS_AS(tab.hat_map(std::vector<int>{tab.d0()}), InputError);
}

TEST_CASE("dot map") {
    SpinTable tab(3, 3);
    CHECK(tab.dot_map(std::vector<int>{tab.h0(), tab.hs()}) == tab.d0());
    CHECK(tab.dot_map(std::vector<int>{tab.h1(), tab.hs()}) == tab.d1());
    CHECK(tab.dot_map(std::vector<int>{tab.h0(), tab.h1()}) == SpinTable::kError);
    CHECK(tab.dot_map(std::vector<int>{tab.hstar(), tab.hs()}) == tab.dstar());
    int j = tab.dot_map(std::vector<int>{tab.hs(), tab.hs()});
    CHECK(tab.is_join(j));
    CHECK(tab.is_dot(j));
    CHECK(tab[j].v == 1);
    CHECK(tab[j].m0 == mpq_class(1, 2));
    CHECK(tab[j].z == mpq_class(1, 2));
    CHECK(tab.flip(j) == j);
}

TEST_CASE("joins are interned and flips are involutions") {
    SpinTable tab(2, 3);
    int a = tab.dot_join({{tab.hs(), 1}});
    CHECK(tab.dot_join({{tab.hs(), 1}}) == a);
    int h = tab.hat_join({{a, 1}, {tab.d0(), 1}});
    CHECK(tab[h].v == 1 + tab[a].v);
    CHECK(tab.flip(tab.flip(h)) == h);
    CHECK(tab[tab.flip(h)].m0 == tab[h].m1);
    CHECK(tab[tab.flip(h)].z == tab[h].z);
    CHECK(tab[h].m0 + tab[h].m1 == 1);
    CHECK_THROWS_AS(tab.dot_join({{tab.d0(), 1}}), InputError);
    CHECK_THROWS_AS(tab.hat_join({{a, 1}}), InputError);
}
