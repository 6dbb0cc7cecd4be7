#pragma once
#include <gmpxx.h>

#include <array>
#include <map>
#include <string>
#include <vector>

#include "naesat/frozen.hpp"
#include "naesat/instance.hpp"

namespace naesat {

// literal-labelled free component class with the data the product formula needs
struct ComponentInfo {
    int v = 0, f = 0, e = 0;
    int eta_b0 = 0, eta_b1 = 0, eta_s = 0;
    mpz_class aut;    // automorphisms acting on vertices and half-edges
    mpz_class w_lit;  // NAE-SAT extensions of the component
    bool cyclic() const { return e >= v + f; }
};

// boundary profile as integer counts on the (n, m, nd) grid
struct BoundaryProfile {
    int n = 0, d = 0, k = 0, m = 0;
    std::map<std::string, int> Bdot;  // d-tuples over {R0,R1,B0,B1} as digit strings, per frozen variable
    std::map<std::string, int> Bhat;  // k-tuples over {R0,R1,B0,B1,S}, per separating clause
    std::array<int, 5> Bbar{};        // boundary edges by color
    std::array<int, 4> h{};           // components, eta(B0), eta(B1), eta(S) summed over components
    std::string key() const;
};

struct FirstMomentProfile {
    BoundaryProfile B;
    std::map<std::string, int> n_f;
    std::map<std::string, ComponentInfo> info;
    std::string key() const;
};

FirstMomentProfile profile_of(const Instance& inst, const FrozenConfig& fc);

struct Compatibility {
    bool ok = true;
    std::string diagnostic;
};
// grid compatibility of (B, h) and, when no component is cyclic, the Euler count of components
Compatibility check_compatibility(const FirstMomentProfile& p);

// product-form expectation of the tilted frozen-configuration partition function restricted to the profile
mpq_class expected_Z_restricted_exact(const FirstMomentProfile& p, int lambda);
long double expected_Z_restricted(const FirstMomentProfile& p, long double lambda);
// log of the same; -inf when some literal indicator average vanishes
long double log_expected_Z_restricted(const FirstMomentProfile& p, long double lambda);

// oracle side: every matching and literal vector, each valid frozen configuration weighted by size^lambda
struct RestrictedEntry {
    FirstMomentProfile profile;
    std::vector<mpq_class> exact;     // per lambda in {0,1}; empty entries otherwise
    std::vector<long double> value;   // per lambda
};
struct RestrictedOracle {
    int n = 0, d = 0, k = 0;
    std::vector<long double> lambdas;
    mpz_class instances;
    std::map<std::string, RestrictedEntry> entries;  // profile key -> averages over instances
    std::vector<mpq_class> total_exact;
    std::vector<long double> total;
};
RestrictedOracle restricted_oracle(int n, int d, int k, const std::vector<long double>& lambdas);

struct PsiCirc {
    long double psi = 0;
    long double log_p = 0;     // log p_o(n, B)
    long double kappa = 0;
    long double log_exact = 0; // log of the exact factorial prefactor times the literal averages
};
// Stirling exponent of the factorial prefactor; all measures normalised by their grid sizes
PsiCirc psi_circ(const BoundaryProfile& B);

struct MomentReport {
    long double lambda = 0;
    int profiles_checked = 0;
    int exact_matches = 0;
    long double max_rel_err = 0;
    bool exact = false;
    mpq_class formula_total_exact, oracle_total_exact;
    long double formula_total = 0, oracle_total = 0;
    bool ok = false;
};
std::vector<MomentReport> verify_first_moment(const RestrictedOracle& oracle, long double tol = 1e-10L);
std::string moment_report_json(const RestrictedOracle& oracle, const std::vector<MomentReport>& reports);

}  // namespace naesat
