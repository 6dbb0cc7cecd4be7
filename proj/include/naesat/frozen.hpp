#pragma once
#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

#include "naesat/instance.hpp"

namespace naesat {

constexpr uint8_t kFree = 2;

// {0,1,f}-labelling of the variables; labels are 0, 1 or kFree
struct FrozenConfig {
    std::vector<uint8_t> labels;

    bool operator==(const FrozenConfig& o) const { return labels == o.labels; }
    bool operator<(const FrozenConfig& o) const { return labels < o.labels; }
    int free_count() const;
    std::string text() const;    // "01f" string
    std::string digest() const;  // FNV-1a 64 of text(), hex
};

FrozenConfig negate(const FrozenConfig& fc);

// variable-flip closure: free v whenever flipping x_v violates no clause (f acts as a wildcard),
// scanning in the given order until nothing changes
FrozenConfig coarsen(const Instance& inst, const Assignment& x);
FrozenConfig coarsen(const Instance& inst, const Assignment& x, const std::vector<int>& order);
// edge-criterion closure: repeatedly free frozen variables without a forcing edge
FrozenConfig coarsen_edges(const Instance& inst, const Assignment& x);

// literal-adjusted value of variable half-edge i: 0, 1 or kFree
uint8_t adjusted(const Instance& inst, const FrozenConfig& fc, int i);
// the other k-1 adjusted values at i's clause are frozen and all equal to c; returns c or -1
int others_constant(const Instance& inst, const FrozenConfig& fc, int i);
bool is_forcing(const Instance& inst, const FrozenConfig& fc, int i);
bool clause_separating(const Instance& inst, const FrozenConfig& fc, int a);
bool clause_violated(const Instance& inst, const FrozenConfig& fc, int a);

struct Classification {
    std::vector<uint8_t> separating;  // per clause
    std::vector<uint8_t> forcing;     // per variable half-edge
};
Classification classify_clauses(const Instance& inst, const FrozenConfig& fc);

struct Validation {
    bool ok = true;
    std::vector<std::string> diagnostics;
};
// checks that no clause is violated, every frozen variable has a forcing edge and no free variable has one
Validation validate_frozen(const Instance& inst, const FrozenConfig& fc);

// every valid frozen configuration, in base-3 order of the labels (guard n <= 16)
std::vector<FrozenConfig> valid_frozen_configs(const Instance& inst);

struct Piece {
    std::vector<int> vars;
    std::vector<int> clauses;
    std::vector<int> internal;     // variable half-edges joining a free variable to a piece clause
    std::vector<int> s_boundary;   // variable half-edges from a free variable to a separating clause
    std::vector<int> b_boundary;   // variable half-edges from a frozen variable to a piece clause
    int v() const { return static_cast<int>(vars.size()); }
    int f() const { return static_cast<int>(clauses.size()); }
    int e() const { return static_cast<int>(internal.size()); }
    int gamma() const { return e() - v() - f(); }
    bool cyclic() const { return gamma() >= 0; }
};

struct FreeStructure {
    std::vector<Piece> pieces;
    std::vector<int> piece_of_var;     // -1 for frozen variables
    std::vector<int> piece_of_clause;  // -1 for separating clauses
    int eta(const Instance& inst, const FrozenConfig& fc, int p, int label) const;  // label 0,1 -> B0,B1; 2 -> S
};

FreeStructure free_structure(const Instance& inst, const FrozenConfig& fc);
bool has_free_cycle(const FreeStructure& fs);
int multicyclic_edge_count(const FreeStructure& fs);
int cyclic_piece_count(const FreeStructure& fs);

// number of NAE-SAT extensions of fc restricted to one piece (exhaustive, guard 2^20)
mpz_class piece_extensions(const Instance& inst, const FrozenConfig& fc, const Piece& p);
// product of piece_extensions; zero if a clause outside the pieces is violated
mpz_class extension_count(const Instance& inst, const FrozenConfig& fc, const FreeStructure& fs);
// exhaustive count of solutions agreeing with fc on its frozen variables
mpz_class brute_size(const Instance& inst, const FrozenConfig& fc);

// iso class of a piece as a labelled structure (internal literals, boundary colors and literals)
struct PieceClass {
    std::string key;
    int v = 0, f = 0, e = 0;
    int eta_b0 = 0, eta_b1 = 0, eta_s = 0;
    mpz_class aut;  // automorphisms acting on vertices and half-edges
};
PieceClass piece_class(const Instance& inst, const FrozenConfig& fc, const Piece& p);

}  // namespace naesat
