#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "naesat/errors.hpp"
#include "naesat/oracle.hpp"

using namespace naesat;

namespace {
Instance figure_instance() {
    return Instance(6, 2, 3, {0, 3, 1, 4, 6, 9, 7, 10, 2, 8, 5, 11}, {1, 0, 1, 1, 0, 1, 0, 0, 0, 0, 0, 1});
}

// clause by clause filter over literal-adjusted values
bool clause_filter(const Instance& inst, const Assignment& x) {
    for (int a = 0; a < inst.m(); ++a) {
        int ones = 0;
        for (int s = 0; s < inst.k(); ++s) {
            int i = inst.edge_at(a * inst.k() + s);
            ones += x[inst.var_of(i)] ^ inst.literal(i);
        }
        if (ones == 0 || ones == inst.k()) return false;
    }
    return true;
}

Assignment bits(uint32_t mask, int n) {
    Assignment x(n);
    for (int v = 0; v < n; ++v) x[v] = (mask >> v) & 1;
    return x;
}

std::set<std::vector<size_t>> partition_of(const ClusterCensus& c) {
    std::set<std::vector<size_t>> out;
    for (auto& cl : c.clusters) {
        auto m = cl.members;
        std::sort(m.begin(), m.end());
        out.insert(m);
    }
    return out;
}
}  // namespace

TEST_CASE("figure instance solutions against a second evaluator") {
    auto inst = figure_instance();
    auto sols = enumerate_solutions(inst);
    std::vector<Assignment> expect;
    for (uint32_t m = 0; m < 64; ++m) {
        Assignment x(6);
        // lexicographic order of (x_0, ..., x_5)
        for (int v = 0; v < 6; ++v) x[v] = (m >> (5 - v)) & 1;
        if (clause_filter(inst, x)) expect.push_back(x);
    }
    CHECK(sols == expect);
}

TEST_CASE("a clause of parallel edges has no solutions") {
    Instance inst(1, 3, 3, {0, 1, 2}, {0, 0, 0});
    CHECK(enumerate_solutions(inst).empty());
    CHECK_FALSE(sample_solution_pair(inst, 1).has_value());
}

TEST_CASE("solutions are closed under negation") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        auto inst = generate(9, 3, 3, seed);
        auto sols = enumerate_solutions(inst);
        std::set<Assignment> s(sols.begin(), sols.end());
        for (auto& x : sols) {
            Assignment y = x;
            for (auto& b : y) b ^= 1;
            CHECK(s.count(y) == 1);
        }
    }
}

TEST_CASE("census of small solution sets") {
    auto c1 = cluster_census({bits(0, 4), bits(15, 4)});
    CHECK(c1.clusters.size() == 2);
    for (auto& cl : c1.clusters) CHECK(cl.size == 1);
    std::vector<Assignment> cube;
    for (uint32_t m = 0; m < 16; ++m) cube.push_back(bits(m, 4));
    auto c2 = cluster_census(cube);
    CHECK(c2.clusters.size() == 1);
    CHECK(c2.clusters[0].size == 16);
}

TEST_CASE("union-find census matches the breadth-first census") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        auto inst = generate(12, 3, 4, seed);
        auto sols = enumerate_solutions(inst);
        auto a = cluster_census(sols);
        auto b = cluster_census_bfs(sols);
        CHECK(partition_of(a) == partition_of(b));
        mpz_class total = 0;
        for (auto& cl : a.clusters) total += cl.size;
        CHECK(total == a.Z);
        CHECK(a.Z == static_cast<long>(sols.size()));
        CHECK(partition_function(a, 1).exact == mpq_class(a.Z));
        CHECK(partition_function(a, 0).exact == mpq_class(static_cast<long>(a.clusters.size())));
    }
}

TEST_CASE("merged census never splits a unit-distance cluster") {
    auto inst = generate(12, 3, 4, 3);
    auto sols = enumerate_solutions(inst);
    auto a = cluster_census(sols);
    auto b = cluster_census(sols, 3);
    CHECK(b.clusters.size() <= a.clusters.size());
}

TEST_CASE("partition function at lambda = 1/2 on sizes 4 and 9") {
    ClusterCensus c;
    c.n = 4;
    c.clusters.resize(2);
    c.clusters[0].size = 4;
    c.clusters[1].size = 9;
    c.Z = 13;
    CHECK(fabsl(partition_function(c, 0.5L).value - 5) < 1e-15L);
    // window [e^{ns}, e^{ns+1}) with n = 4
    CHECK(fabsl(partition_function(c, 1, SizeWindow{logl(2.0L) / 4}).value - 4) < 1e-12L);
    CHECK(fabsl(partition_function(c, 1, SizeWindow{logl(9.0L) / 4}).value - 9) < 1e-12L);
    CHECK(fabsl(partition_function(c, 1, SizeWindow{logl(3.5L) / 4}).value - 13) < 1e-12L);
}

TEST_CASE("overlap") {
    auto x = bits(0b0110, 4);
    Assignment nx = x;
    for (auto& b : nx) b ^= 1;
    CHECK(overlap(x, x) == 1);
    CHECK(overlap(x, nx) == -1);
    CHECK(overlap(bits(0, 4), bits(0b1100, 4)) == 0);
    CHECK_THROWS_AS(overlap(bits(0, 4), bits(0, 3)), InputError);
}

TEST_CASE("expected partition function by full enumeration") {
    auto a = exact_expected_partition(3, 2, 3, 1);
    CHECK(*a.exact == mpq_class(9, 2));
    auto b = exact_expected_partition(2, 2, 4, 1);
    CHECK(*b.exact == mpq_class(7, 2));
    auto c = exact_expected_partition(3, 2, 3, 0);
    CHECK(*c.exact <= *a.exact);
    CHECK_THROWS_AS(exact_expected_partition(7, 2, 2, 1), CapacityError);
}

TEST_CASE("sample pairs") {
    std::vector<Assignment> one = {bits(5, 4)};
    auto p = sample_solution_pair(one, 3);
    REQUIRE(p.has_value());
    CHECK(p->rho == 1);
    // chi-square against uniform over the solution list at 10^4 draws
    auto inst = generate(9, 3, 3, 2);
    auto sols = enumerate_solutions(inst);
    REQUIRE(sols.size() >= 4);
    std::map<Assignment, int> freq;
    const int N = 10000;
    long double rho_sum = 0;
    for (uint64_t s = 0; s < N; ++s) {
        auto q = sample_solution_pair(sols, s);
        freq[q->x1]++;
        rho_sum += q->rho.get_d();
    }
    long double expect = static_cast<long double>(N) / sols.size();
    long double chi2 = 0;
    for (auto& x : sols) chi2 += (freq[x] - expect) * (freq[x] - expect) / expect;
    long double df = sols.size() - 1;
    CHECK(chi2 < df + 5 * sqrtl(2 * df));
    CHECK(fabsl(rho_sum / N) < 0.05L);
}
