#pragma once
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "naesat/freetree.hpp"
#include "naesat/spin.hpp"

namespace naesat {

// Truncated spin spaces in the literal-adjusted frame. Frozen spins are carried by color
// (R, B per value); free dotted spins are dotted joins with v <= L, free hatted spins are S and
// hatted joins with v <= L.
struct BpSpace {
    int d = 0, k = 0, L = 0;
    struct DotJoin {
        int id = -1, v = 0, flip = -1;
        Multiset hats;  // (index into hat joins, multiplicity)
        int s_count = 0;
        long double log_multi = 0, logz = 0, m0 = 0, m1 = 0;
    };
    struct HatJoin {
        int id = -1, v = 0, flip = -1;
        Multiset dots;  // (index into dot joins, multiplicity)
        int pad = 0, pad_value = 0;  // pad copies of D0 (pad_value 0) or D1
        long double log_multi = 0, logz = 0, m0 = 0, m1 = 0;
    };
    // free dotted multisets feeding one clause: j entries, total v <= L
    struct FreeTuple {
        Multiset items;
        int size = 0, v = 0;
        long double log_orderings = 0;
        long double log_m0 = 0, log_m1 = 0;  // log prod of mdot(0), mdot(1)
    };
    // free hatted multisets around a free variable besides S entries
    struct HatTuple {
        Multiset items;
        int size = 0, v = 1;
        long double log_m0 = 0, log_m1 = 0;
    };
    std::vector<DotJoin> dots;
    std::vector<HatJoin> hats;
    std::vector<FreeTuple> tuples;
    std::vector<HatTuple> hat_tuples;
    std::map<int, int> dot_of, hat_of;  // spin id -> index
    int dot_index(int id) const;
    int hat_index(int id) const;
};

BpSpace build_space(SpinTable& tab, int L);

// qdot up to 0/1 symmetry: r = q(R0) = q(R1), b = q(B0) = q(B1), one entry per free dotted join
struct DotMeasure {
    long double r = 0, b = 0;
    std::vector<long double> free;
    long double free_mass() const;
    long double mass() const { return 2 * r + 2 * b + free_mass(); }
};

struct HatMeasure {
    long double r = 0, b = 0, s = 0;
    std::vector<long double> join;
    long double mass() const;
};

struct BpParams {
    int d = 0, k = 0, L = 1;
    long double lambda = 0;
    long double damping = 0.5L;
    long double tol = 1e-12L;
    int max_iter = 500;
    int polish_iter = 100;  // extra steps after reaching tol, kept while the residual falls
    long double gamma_C = 30;
};

struct StepResult {
    HatMeasure hat;
    DotMeasure dot;
    long double log_Zhat = 0, log_Zdot = 0;  // BP normalizers
};

StepResult bp_step(const BpSpace& sp, const DotMeasure& q, long double lambda);
long double l1_distance(const DotMeasure& a, const DotMeasure& b);
// averages each join with its flip
void symmetrize(const BpSpace& sp, DotMeasure& q);

DotMeasure near_frozen_init(const BpSpace& sp, long double eps = 1e-3L);
DotMeasure spread_init(const BpSpace& sp);

struct GammaReport {
    bool symmetric = true;
    bool lower = false, upper = false;
    long double C = 0;
    bool ok() const { return symmetric && lower && upper; }
};
GammaReport gamma_check(const BpSpace& sp, const DotMeasure& q, long double C);

struct BpState {
    BpParams params;
    DotMeasure qdot;
    HatMeasure qhat;
    long double log_Zdot = 0, log_Zhat = 0;
    long double residual = 0;
    int iterations = 0;  // until the residual first reached tol
    bool converged = false;
    std::vector<long double> residuals;
    std::vector<long double> contraction;     // |BP q_t - q*| / |q_t - q*| along the trajectory
    std::vector<bool> contraction_in_gamma;  // q_t inside Gamma_C
    GammaReport gamma;
    long double max_contraction_in_gamma() const;
    long double q_R() const { return 2 * qdot.r; }
    long double q_B() const { return 2 * qdot.b; }
    long double q_f() const { return qdot.free_mass(); }
};

// throws ValidationError carrying the residual trace when max_iter is exhausted
BpState solve_fixed_point(const BpSpace& sp, const BpParams& p, std::optional<DotMeasure> init = std::nullopt);

// Hdot/Hhat/Hbar normalizers and the boundary restriction
struct Normalizers {
    long double log_zdot = 0, log_zhat = 0, log_zbar = 0;
    long double log_zdot_direct = 0, log_zhat_direct = 0;  // by direct tuple sums
};

struct OptimalProfile {
    long double lambda = 0;
    int d = 0, k = 0, L = 0;
    Normalizers z;
    // Bdot per color: value of one tuple with j R's (j = 1..d) is exp(bdot_log[j])
    std::vector<long double> bdot_log;
    long double bdot_mass = 0;
    // Bhat by raw type (r, b, s): per-tuple value and tuple count
    struct HatType {
        int r, b, s;
        long double vhat, log_value, log_count;
    };
    std::vector<HatType> bhat;
    long double bhat_mass = 0, bhat_b0 = 0;  // total mass, sum of Bhat * #B0
    std::array<long double, 5> bbar{};       // R0 R1 B0 B1 S
    std::array<long double, 4> h{};          // circ, B0, B1, S
    std::vector<long double> p_tree;         // per catalog tree
    std::vector<long double> log_p_tree;
    std::array<long double, 4> h_trees{};    // sum_t p_t eta_t
    long double s_star = 0;
    // free dotted marginal of Hbar (incl. S half-edges) against tree edge counts, per flip orbit
    long double hdot_max_err = 0;
    long double hdot_rb_err = 0;
};

OptimalProfile optimal_profiles(const BpSpace& sp, const BpState& st, const TreeCatalog& cat, SpinTable& tab);

struct ThetaPsi {
    std::array<long double, 5> theta{};  // circ, B0, B1, S, s
    long double psi = 0;
    std::array<long double, 5> grad{}, grad_fd{};
    long double max_identity_err = 0;  // relative, J w^lambda e^<theta, eta> against p*_t
    // relative errors; B components vanish at L = 1, so the floor of the denominator is h*(circ)
    long double max_grad_err = 0;  // analytic gradient against (h*, s*)
    long double max_fd_err = 0;
};
long double psi_at(const TreeCatalog& cat, int L, long double lambda, const std::array<long double, 5>& theta);
ThetaPsi theta_and_psi(const BpState& st, const OptimalProfile& prof, const TreeCatalog& cat, long double fd_step = 1e-6L);

struct FreeEnergy {
    long double F = 0;      // from the normalizers
    long double F_psi = 0;  // Psi_circ(B*) - <theta*, h*>
    long double psi_circ = 0;
    long double f_rs = 0;
    bool above_rs = false;
};
long double f_rs(int d, int k);
FreeEnergy free_energy(const BpState& st, const OptimalProfile& prof, const ThetaPsi& th);

// one solved point
struct BpPoint {
    BpState state;
    OptimalProfile profile;
    ThetaPsi theta;
    FreeEnergy energy;
};
BpPoint solve_point(const BpSpace& sp, const TreeCatalog& cat, SpinTable& tab, BpParams p);

// tolerance checks of one solved point
struct BpAudit {
    bool residual = false;     // converged to tol within max_iter
    bool bands = false;        // q(R), q(B), q(f) within 10 * 2^-k of 1/2, 1/2, 0
    bool gamma = false;        // fixed point inside Gamma_C
    bool contraction = false;  // contraction ratio inside Gamma_C at most 1/2
    bool normalizers = false;  // zdot = Zdot zbar and zhat = Zhat zbar to 1e-8
    bool compat = false;       // sum_t p_t eta_t = h* to 1e-8
    bool hdot = false;         // dotted marginals to 1e-8
    bool theta = false;        // J w^lambda e^<theta*, eta> = p*_t to 1e-8
    bool grad = false;         // analytic gradient = (h*, s*) to 1e-6
    bool grad_fd = false;      // finite differences to 1e-5
    bool decay = false;        // sum over v(t) = v of p*_t <= 2^{-kv/2}
    bool energy = false;       // normalizer and Psi_circ forms of F to 1e-8
    bool below_rs = false;     // F <= f_rs + 1e-9
    long double compat_err = 0, energy_err = 0, normalizer_err = 0;
    bool ok() const;
    std::string failures() const;
};
BpAudit audit_point(const BpPoint& pt, const TreeCatalog& cat);

struct LambdaStar {
    std::string flag;  // "crossing", "no_crossing_positive", "no_crossing_negative"
    long double lambda_star = 0, s_star = 0, c_star = 0;
    int evaluations = 0;
    bool monotone = true;
    std::vector<std::pair<long double, long double>> path;  // (lambda, F - lambda s)
};
LambdaStar lambda_star(const BpSpace& sp, const TreeCatalog& cat, SpinTable& tab, BpParams p,
                       long double tol_lambda = 1e-6L);

struct PStar {
    long double p_star = 0, p_star_alt = 0, tail_bound = 0;
    bool in_range = true;
};
long double decay_tail(int k, int L);
PStar p_star(const OptimalProfile& prof, const TreeCatalog& cat);

std::string sweep_csv_header();
std::string sweep_csv_row(const BpPoint& pt, const std::string& lambda_star_flag);
std::string constants_json(const LambdaStar& ls, const PStar& ps, int L);

// d at the middle of [k (2^{k-1}-2) log 2, k 2^{k-1} log 2]
int band_degree(int k);

}  // namespace naesat
