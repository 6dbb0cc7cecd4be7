#pragma once
#include <gmpxx.h>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "naesat/frozen.hpp"
#include "naesat/instance.hpp"
#include "naesat/spin.hpp"

namespace naesat {

// message configuration indexed by variable half-edge
struct Messages {
    std::vector<int> dot, hat;
    bool operator==(const Messages& o) const { return dot == o.dot && hat == o.hat; }
};

// four-step construction; stars fill whatever the local equations cannot reach
Messages compute_messages(const Instance& inst, const FrozenConfig& fc, SpinTable& tab);
// same, refusing configurations with a free cycle
Messages build_messages(const Instance& inst, const FrozenConfig& fc, SpinTable& tab);
// first variable half-edge violating a local equation, or -1
int local_equation_violation(const Instance& inst, const Messages& msg, SpinTable& tab);
FrozenConfig messages_to_frozen(const Instance& inst, const Messages& msg, const SpinTable& tab);

// coloring alphabet: R0, R1, B0, B1, free; the boundary alphabet reuses 4 for S
enum Color : uint8_t { R0 = 0, R1 = 1, B0 = 2, B1 = 3, F = 4, S = 4 };
std::string color_name(uint8_t c);

struct ColorSpin {
    uint8_t tag = F;
    int dot = -1, hat = -1;  // set for free colors
    bool operator==(const ColorSpin& o) const {
        return tag == o.tag && (tag != F || (dot == o.dot && hat == o.hat));
    }
};

std::vector<ColorSpin> project_coloring(const Messages& msg, const SpinTable& tab);
// inverse of the projection: known parts first, the rest from the local equations
Messages coloring_to_messages(const Instance& inst, const std::vector<ColorSpin>& col, SpinTable& tab);

// literal-adjusted color: R/B indices and free spins flip when lit = 1
ColorSpin adjust(const ColorSpin& c, int lit, const SpinTable& tab);
bool valid_var(const std::vector<ColorSpin>& at_v, SpinTable& tab);
// Ihat^lit on literal-adjusted colors
bool valid_clause(const std::vector<ColorSpin>& adj, SpinTable& tab);

struct ColoringCheck {
    bool ok = true;
    std::string diagnostic;
};
ColoringCheck check_coloring(const Instance& inst, const std::vector<ColorSpin>& col, SpinTable& tab);

// weights
mpq_class phi_dot(const std::vector<int>& hats, const SpinTable& tab);
mpq_class phi_bar(int dot, int hat, const SpinTable& tab);
mpq_class phi_hat_lit(const std::vector<int>& adjusted_dots, const SpinTable& tab);
mpq_class Phi_dot(const std::vector<ColorSpin>& at_v, SpinTable& tab);
mpq_class Phi_hat_lit(const std::vector<ColorSpin>& adj, SpinTable& tab);
mpq_class Phi_bar(const ColorSpin& c, const SpinTable& tab);

// product of Phi weights over the coloring of fc; equals size(fc) when fc has no free cycle
mpq_class size_formula(const Instance& inst, const FrozenConfig& fc, SpinTable& tab);
mpq_class coloring_weight(const Instance& inst, const std::vector<ColorSpin>& col, SpinTable& tab);

// literal average of Ihat over boundary k-tuples (entries in {R0,R1,B0,B1,S})
mpq_class vhat_enumerate(const std::vector<uint8_t>& tuple);
mpq_class vhat_closed(const std::vector<uint8_t>& tuple);
// closed form from the counts of R, B and S entries
mpq_class vhat_counts(int k, int r, int b, int s);
// literal average of Ihat for a clause with free spins (colors not adjusted)
mpq_class vhat_colors(const std::vector<ColorSpin>& at_a, SpinTable& tab);

// boundary and component profile of a frozen configuration (cycles allowed)
struct Profile {
    int n = 0, d = 0, k = 0, m = 0;
    std::map<std::string, int> Bdot;  // ordered d-tuples over {R0,R1,B0,B1}, as digit strings
    std::map<std::string, int> Bhat;  // ordered k-tuples over {R0,R1,B0,B1,S}
    std::array<int, 5> Bbar{};        // edge counts by color
    std::array<int, 4> h{};           // pieces, eta(B0), eta(B1), eta(S)
    std::map<std::string, int> comps; // component class key -> count
    std::string key() const;
    int frozen() const;
    int separating() const;
    int boundary_edges() const;
};
Profile component_profile(const Instance& inst, const FrozenConfig& fc);
// edge colors of the component coloring: R/B on frozen variables, S on free-to-separating edges, -1 internal
std::vector<int> component_colors(const Instance& inst, const FrozenConfig& fc);

// cluster weight as (product of tree sizes, n); refuses free cycles
struct ClusterWeight {
    mpz_class product;
    int n;
    long double s() const;
};
ClusterWeight cluster_weight_s(const Instance& inst, const FrozenConfig& fc, SpinTable& tab);

}  // namespace naesat
