#pragma once
#include <gmpxx.h>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "naesat/spin.hpp"

namespace naesat {

struct TreeEdge {
    int var, clause, lit;
};

struct Boundary {
    int color;  // 0 or 1: spin label B0 or B1 of the frozen neighbour
    int lit;
};

// free tree with boundary labels; spins and statistics filled by canonicalize
struct FreeTree {
    int d = 0, k = 0;
    int v = 0, f = 0;
    std::vector<TreeEdge> edges;                 // internal edges
    std::vector<int> s_count;                    // S half-edges per variable
    std::vector<std::vector<Boundary>> bound;    // boundary half-edges per clause

    std::string key;
    std::vector<int> dot, hat;  // spins per internal edge (ids of the table used)
    std::vector<int> s_dot;     // dotted spin on the S half-edges per variable (-1 if none)
    int eta_b0 = 0, eta_b1 = 0, eta_s = 0;
    mpq_class J;
    mpz_class w_lit;
    mpq_class vhat_prod;  // product of literal-averaged clause indicators
    mpq_class ham, overlap;

    int e() const { return static_cast<int>(edges.size()); }
    bool operator==(const FreeTree& o) const { return key == o.key; }
};

// single free variable with d S half-edges
FreeTree single_variable_tree(int d, int k);

// validates the raw tree, computes spins, key and all statistics
FreeTree canonicalize(FreeTree raw, SpinTable& tab);
// key only (spins are computed as a side effect); throws InputError on an invalid tree
std::string tree_key(FreeTree& t, SpinTable& tab);

// exhaustive count of solutions honouring the boundary labels
mpz_class tree_size_brute(const FreeTree& t);
// product of the local weights over the spins of t
mpq_class tree_size_phi(const FreeTree& t, const SpinTable& tab);
std::vector<std::vector<uint8_t>> tree_solutions(const FreeTree& t);

// multinomial formula over the spin multisets around each vertex
mpq_class embedding_number(const FreeTree& t, const SpinTable& tab);
// distinct port-labelled realizations of t divided by d^{v-1} k^f
mpq_class embedding_number_brute(const FreeTree& t, const SpinTable& tab);

struct OverlapStats {
    mpq_class ham, overlap;
};
OverlapStats tree_overlap_stats(const FreeTree& t);

// boundary spin-label flip B0 <-> B1 with literals kept
FreeTree flip_boundary(const FreeTree& t);

struct TreeCatalog {
    int d = 0, k = 0, L = 0;
    std::vector<FreeTree> trees;      // sorted by (v, key)
    std::vector<bool> complete;       // per v in [0, L]
    std::map<std::string, int> index;
    int count(int v) const;
};

// all free trees with v(t) <= L; throws CapacityError if more than budget trees arise
TreeCatalog enumerate_catalog(int d, int k, int L, SpinTable& tab, size_t budget = 200000);

struct WcomCheck {
    mpq_class lhs_exact, rhs_exact;  // set for lambda in {0, 1}
    long double lhs = 0, rhs = 0;
    bool exact = false;
    bool ok = false;
};
// d^{v-1} k^f J_t w_t^lambda against the sum over literal-labelled components of t
WcomCheck w_vs_wcom_check(const FreeTree& t, SpinTable& tab, long double lambda);

// one JSON object per line
std::string catalog_jsonl(const TreeCatalog& cat);

}  // namespace naesat
