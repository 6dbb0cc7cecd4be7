#include "naesat/coloring.hpp"

#include <algorithm>
#include <sstream>

#include "naesat/errors.hpp"
#include "naesat/exact.hpp"

namespace naesat {

namespace {

std::vector<int> clause_edges(const Instance& inst, int a) {
    std::vector<int> out;
    for (int s = a * inst.k(); s < (a + 1) * inst.k(); ++s) out.push_back(inst.edge_at(s));
    return out;
}

// fixpoint of the local equations from partially known messages
void fill_local(const Instance& inst, Messages& msg, SpinTable& tab) {
    int nd = inst.edges(), d = inst.d();
    bool changed = true;
    while (changed) {
        changed = false;
        for (int i = 0; i < nd; ++i) {
            if (msg.dot[i] < 0) {
                int v = inst.var_of(i);
                bool has0 = false, has1 = false, all = true;
                std::vector<int> others;
                for (int j = v * d; j < (v + 1) * d; ++j) {
                    if (j == i) continue;
                    int h = msg.hat[j];
                    if (h < 0) {
                        all = false;
                        continue;
                    }
                    has0 |= h == tab.h0();
                    has1 |= h == tab.h1();
                    others.push_back(h);
                }
                if (has0 && has1) throw ValidationError("error symbol at variable " + std::to_string(v));
                int out = -1;
                if (has0) out = tab.d0();
                else if (has1) out = tab.d1();
                else if (all) out = tab.dot_map(others);
                if (out >= 0) {
                    msg.dot[i] = out;
                    changed = true;
                }
            }
            if (msg.hat[i] < 0) {
                bool has0 = false, has1 = false, all = true;
                std::vector<int> adj;
                for (int j : clause_edges(inst, inst.clause_of(i))) {
                    if (j == i) continue;
                    if (msg.dot[j] < 0) {
                        all = false;
                        continue;
                    }
                    int a = tab.literal_flip(msg.dot[j], inst.literal(j));
                    has0 |= a == tab.d0();
                    has1 |= a == tab.d1();
                    adj.push_back(a);
                }
                int out = -1;
                if (has0 && has1) out = tab.hs();
                else if (all) out = tab.literal_flip(tab.hat_map(adj), inst.literal(i));
                if (out >= 0) {
                    msg.hat[i] = out;
                    changed = true;
                }
            }
        }
    }
    for (int i = 0; i < nd; ++i) {
        if (msg.dot[i] < 0) msg.dot[i] = tab.dstar();
        if (msg.hat[i] < 0) msg.hat[i] = tab.hstar();
    }
}

}  // namespace

Messages compute_messages(const Instance& inst, const FrozenConfig& fc, SpinTable& tab) {
    if (tab.d() != inst.d() || tab.k() != inst.k()) throw ConfigError("spin table (d,k) differs from instance");
    int nd = inst.edges();
    Messages msg{std::vector<int>(nd, -1), std::vector<int>(nd, -1)};
    for (int i = 0; i < nd; ++i)
        if (is_forcing(inst, fc, i)) msg.hat[i] = fc.labels[inst.var_of(i)] == 0 ? tab.h0() : tab.h1();
    fill_local(inst, msg, tab);
    return msg;
}

Messages build_messages(const Instance& inst, const FrozenConfig& fc, SpinTable& tab) {
    if (has_free_cycle(free_structure(inst, fc))) throw ValidationError("frozen configuration has a free cycle");
    return compute_messages(inst, fc, tab);
}

int local_equation_violation(const Instance& inst, const Messages& msg, SpinTable& tab) {
    int d = inst.d();
    for (int i = 0; i < inst.edges(); ++i) {
        int v = inst.var_of(i);
        std::vector<int> others;
        for (int j = v * d; j < (v + 1) * d; ++j)
            if (j != i) others.push_back(msg.hat[j]);
        int edot = tab.dot_map(others);
        if (edot == SpinTable::kError || edot != msg.dot[i]) return i;
        std::vector<int> adj;
        for (int j : clause_edges(inst, inst.clause_of(i)))
            if (j != i) adj.push_back(tab.literal_flip(msg.dot[j], inst.literal(j)));
        if (tab.literal_flip(tab.hat_map(adj), inst.literal(i)) != msg.hat[i]) return i;
    }
    return -1;
}

FrozenConfig messages_to_frozen(const Instance& inst, const Messages& msg, const SpinTable& tab) {
    FrozenConfig fc{std::vector<uint8_t>(inst.n(), kFree)};
    for (int i = 0; i < inst.edges(); ++i) {
        int v = inst.var_of(i);
        int x = msg.hat[i] == tab.h0() ? 0 : msg.hat[i] == tab.h1() ? 1 : -1;
        if (x < 0) continue;
        if (fc.labels[v] != kFree && fc.labels[v] != x)
            throw ValidationError("conflicting hatted messages at variable " + std::to_string(v));
        fc.labels[v] = static_cast<uint8_t>(x);
    }
    return fc;
}

std::string color_name(uint8_t c) {
    static const char* names[] = {"R0", "R1", "B0", "B1", "F"};
    return c < 5 ? names[c] : "?";
}

std::vector<ColorSpin> project_coloring(const Messages& msg, const SpinTable& tab) {
    std::vector<ColorSpin> col(msg.dot.size());
    for (size_t i = 0; i < col.size(); ++i) {
        int h = msg.hat[i], dt = msg.dot[i];
        if (h == tab.h0()) col[i].tag = R0;
        else if (h == tab.h1()) col[i].tag = R1;
        else if (dt == tab.d0()) col[i].tag = B0;
        else if (dt == tab.d1()) col[i].tag = B1;
        else col[i] = ColorSpin{F, dt, h};
    }
    return col;
}

Messages coloring_to_messages(const Instance& inst, const std::vector<ColorSpin>& col, SpinTable& tab) {
    int nd = inst.edges();
    Messages msg{std::vector<int>(nd, -1), std::vector<int>(nd, -1)};
    for (int i = 0; i < nd; ++i) {
        switch (col[i].tag) {
            case R0: msg.hat[i] = tab.h0(); break;
            case R1: msg.hat[i] = tab.h1(); break;
            case B0: msg.dot[i] = tab.d0(); break;
            case B1: msg.dot[i] = tab.d1(); break;
            default:
                msg.dot[i] = col[i].dot;
                msg.hat[i] = col[i].hat;
        }
    }
    fill_local(inst, msg, tab);
    return msg;
}

ColorSpin adjust(const ColorSpin& c, int lit, const SpinTable& tab) {
    if (!lit) return c;
    if (c.tag != F) return ColorSpin{static_cast<uint8_t>(c.tag ^ 1), -1, -1};
    return ColorSpin{F, c.dot < 0 ? -1 : tab.flip(c.dot), c.hat < 0 ? -1 : tab.flip(c.hat)};
}

bool valid_var(const std::vector<ColorSpin>& at_v, SpinTable& tab) {
    int frozen_x = -1;
    bool any_r = false, any_f = false, any_rb = false;
    for (auto& c : at_v) {
        if (c.tag == F) {
            any_f = true;
            continue;
        }
        any_rb = true;
        int x = c.tag & 1;
        if (frozen_x >= 0 && frozen_x != x) return false;
        frozen_x = x;
        any_r |= c.tag == R0 || c.tag == R1;
    }
    if (any_rb) return !any_f && any_r;
    for (size_t i = 0; i < at_v.size(); ++i) {
        std::vector<int> others;
        for (size_t j = 0; j < at_v.size(); ++j)
            if (j != i) others.push_back(at_v[j].hat);
        int e = tab.dot_map(others);
        if (e == SpinTable::kError || e != at_v[i].dot) return false;
    }
    return true;
}

bool valid_clause(const std::vector<ColorSpin>& adj, SpinTable& tab) {
    int nr = 0, nf = 0, rx = -1;
    int nb[2] = {0, 0};
    for (auto& c : adj) {
        if (c.tag == R0 || c.tag == R1) {
            ++nr;
            rx = c.tag & 1;
        } else if (c.tag == B0 || c.tag == B1) {
            nb[c.tag & 1]++;
        } else {
            ++nf;
        }
    }
    if (nr > 0) return nr == 1 && nf == 0 && nb[rx] == 0;
    if (nb[0] > 0 && nb[1] > 0) {
        for (auto& c : adj)
            if (c.tag == F && c.hat != tab.hs()) return false;
        if (nf == 0) return nb[0] >= 2 && nb[1] >= 2;
        return true;
    }
    if (nf < 2) return false;
    for (size_t i = 0; i < adj.size(); ++i) {
        if (adj[i].tag != F) continue;
        std::vector<int> dots;
        for (size_t j = 0; j < adj.size(); ++j) {
            if (j == i) continue;
            const auto& c = adj[j];
            dots.push_back(c.tag == F ? c.dot : (c.tag & 1) ? tab.d1() : tab.d0());
        }
        if (tab.hat_map(dots) != adj[i].hat) return false;
    }
    return true;
}

ColoringCheck check_coloring(const Instance& inst, const std::vector<ColorSpin>& col, SpinTable& tab) {
    int d = inst.d();
    for (int v = 0; v < inst.n(); ++v) {
        std::vector<ColorSpin> at(col.begin() + v * d, col.begin() + (v + 1) * d);
        if (!valid_var(at, tab)) return {false, "variable indicator fails at variable " + std::to_string(v)};
    }
    for (int a = 0; a < inst.m(); ++a) {
        std::vector<ColorSpin> adj;
        for (int i : clause_edges(inst, a)) adj.push_back(adjust(col[i], inst.literal(i), tab));
        if (!valid_clause(adj, tab)) return {false, "clause indicator fails at clause " + std::to_string(a)};
    }
    return {true, ""};
}

mpq_class phi_dot(const std::vector<int>& hats, const SpinTable& tab) {
    mpq_class p0 = 1, p1 = 1;
    for (int h : hats) {
        p0 *= tab[h].m0;
        p1 *= tab[h].m1;
    }
    return p0 + p1;
}

mpq_class phi_bar(int dot, int hat, const SpinTable& tab) {
    mpq_class s = tab[dot].m0 * tab[hat].m0 + tab[dot].m1 * tab[hat].m1;
    return 1 / s;
}

mpq_class phi_hat_lit(const std::vector<int>& adjusted_dots, const SpinTable& tab) {
    mpq_class q0 = 1, q1 = 1;
    for (int dt : adjusted_dots) {
        q0 *= tab[dt].m0;
        q1 *= tab[dt].m1;
    }
    return 1 - q0 - q1;
}

mpq_class Phi_dot(const std::vector<ColorSpin>& at_v, SpinTable& tab) {
    if (!valid_var(at_v, tab)) return 0;
    if (at_v.front().tag != F) return 1;
    std::vector<int> hats;
    for (auto& c : at_v) hats.push_back(c.hat);
    return phi_dot(hats, tab);
}

mpq_class Phi_hat_lit(const std::vector<ColorSpin>& adj, SpinTable& tab) {
    if (!valid_clause(adj, tab)) return 0;
    std::vector<int> dots;
    for (auto& c : adj) {
        if (c.tag == R0 || c.tag == R1) return 1;
        dots.push_back(c.tag == F ? c.dot : (c.tag & 1) ? tab.d1() : tab.d0());
    }
    return phi_hat_lit(dots, tab);
}

mpq_class Phi_bar(const ColorSpin& c, const SpinTable& tab) { return c.tag == F ? phi_bar(c.dot, c.hat, tab) : mpq_class(1); }

mpq_class coloring_weight(const Instance& inst, const std::vector<ColorSpin>& col, SpinTable& tab) {
    int d = inst.d();
    for (auto& c : col)
        if (c.tag == F && (tab[c.dot].star || tab[c.hat].star)) throw ValidationError("coloring contains a star spin");
    mpq_class w = 1;
    for (int v = 0; v < inst.n() && w != 0; ++v)
        w *= Phi_dot(std::vector<ColorSpin>(col.begin() + v * d, col.begin() + (v + 1) * d), tab);
    for (int a = 0; a < inst.m() && w != 0; ++a) {
        std::vector<ColorSpin> adj;
        for (int i : clause_edges(inst, a)) adj.push_back(adjust(col[i], inst.literal(i), tab));
        w *= Phi_hat_lit(adj, tab);
    }
    for (auto& c : col) w *= Phi_bar(c, tab);
    return w;
}

mpq_class size_formula(const Instance& inst, const FrozenConfig& fc, SpinTable& tab) {
    Messages msg = build_messages(inst, fc, tab);
    return coloring_weight(inst, project_coloring(msg, tab), tab);
}

namespace {

bool valid_boundary(const std::vector<uint8_t>& adj) {
    int nr = 0, ns = 0, rx = -1;
    int nb[2] = {0, 0};
    for (auto c : adj) {
        if (c <= R1) {
            ++nr;
            rx = c & 1;
        } else if (c <= B1) {
            nb[c & 1]++;
        } else {
            ++ns;
        }
    }
    if (nr > 0) return nr == 1 && ns == 0 && nb[rx] == 0;
    if (nb[0] == 0 || nb[1] == 0) return false;
    return ns > 0 || (nb[0] >= 2 && nb[1] >= 2);
}

}  // namespace

mpq_class vhat_enumerate(const std::vector<uint8_t>& tuple) {
    int k = static_cast<int>(tuple.size());
    long good = 0;
    for (long L = 0; L < (1L << k); ++L) {
        std::vector<uint8_t> adj(tuple);
        for (int i = 0; i < k; ++i)
            if (adj[i] != S && ((L >> i) & 1)) adj[i] ^= 1;
        good += valid_boundary(adj);
    }
    mpq_class q(good, 1L << k);
    q.canonicalize();
    return q;
}

mpq_class vhat_counts(int k, int r, int b, int s) {
    mpq_class two_k(mpz_class(1) << k);
    if (r > 0) return (r == 1 && s == 0) ? mpq_class(2) / two_k : mpq_class(0);
    if (s > 0) return b >= 2 ? 1 - mpq_class(2) / mpq_class(mpz_class(1) << b) : mpq_class(0);
    // every adjusted value appears at least twice
    mpz_class good = (mpz_class(1) << k) - 2 - 2 * k + (k == 2 ? 2 : 0);
    mpq_class q(good, mpz_class(1) << k);
    q.canonicalize();
    return q;
}

mpq_class vhat_closed(const std::vector<uint8_t>& tuple) {
    int r = 0, b = 0, s = 0;
    for (auto c : tuple) (c <= R1 ? r : c <= B1 ? b : s)++;
    return vhat_counts(static_cast<int>(tuple.size()), r, b, s);
}

mpq_class vhat_colors(const std::vector<ColorSpin>& at_a, SpinTable& tab) {
    int k = static_cast<int>(at_a.size());
    long good = 0;
    for (long L = 0; L < (1L << k); ++L) {
        std::vector<ColorSpin> adj;
        for (int i = 0; i < k; ++i) adj.push_back(adjust(at_a[i], (L >> i) & 1, tab));
        good += valid_clause(adj, tab);
    }
    mpq_class q(good, 1L << k);
    q.canonicalize();
    return q;
}

std::vector<int> component_colors(const Instance& inst, const FrozenConfig& fc) {
    std::vector<int> col(inst.edges(), -1);
    for (int i = 0; i < inst.edges(); ++i) {
        uint8_t x = fc.labels[inst.var_of(i)];
        if (x != kFree) col[i] = is_forcing(inst, fc, i) ? R0 + x : B0 + x;
        else if (clause_separating(inst, fc, inst.clause_of(i))) col[i] = S;
    }
    return col;
}

int Profile::frozen() const {
    int c = 0;
    for (auto& [t, x] : Bdot) c += x;
    return c;
}

int Profile::separating() const {
    int c = 0;
    for (auto& [t, x] : Bhat) c += x;
    return c;
}

int Profile::boundary_edges() const {
    int c = 0;
    for (int x : Bbar) c += x;
    return c;
}

std::string Profile::key() const {
    std::ostringstream os;
    os << "D";
    for (auto& [t, c] : Bdot) os << ' ' << t << ':' << c;
    os << "|H";
    for (auto& [t, c] : Bhat) os << ' ' << t << ':' << c;
    os << "|C";
    for (auto& [t, c] : comps) os << ' ' << t << ':' << c;
    return os.str();
}

Profile component_profile(const Instance& inst, const FrozenConfig& fc) {
    Profile p;
    p.n = inst.n();
    p.d = inst.d();
    p.k = inst.k();
    p.m = inst.m();
    auto col = component_colors(inst, fc);
    int d = inst.d();
    for (int v = 0; v < inst.n(); ++v) {
        if (fc.labels[v] == kFree) continue;
        std::string t;
        for (int i = v * d; i < (v + 1) * d; ++i) t += static_cast<char>('0' + col[i]);
        p.Bdot[t]++;
    }
    for (int a = 0; a < inst.m(); ++a) {
        if (!clause_separating(inst, fc, a)) continue;
        std::string t;
        for (int i : clause_edges(inst, a)) t += static_cast<char>('0' + col[i]);
        p.Bhat[t]++;
    }
    for (int c : col)
        if (c >= 0) p.Bbar[c]++;
    FreeStructure fs = free_structure(inst, fc);
    p.h[0] = static_cast<int>(fs.pieces.size());
    for (size_t q = 0; q < fs.pieces.size(); ++q) {
        PieceClass pc = piece_class(inst, fc, fs.pieces[q]);
        p.h[1] += pc.eta_b0;
        p.h[2] += pc.eta_b1;
        p.h[3] += pc.eta_s;
        p.comps[pc.key]++;
    }
    return p;
}

long double ClusterWeight::s() const { return n ? log_of(product) / n : 0.0L; }

ClusterWeight cluster_weight_s(const Instance& inst, const FrozenConfig& fc, SpinTable& tab) {
    (void)tab;
    FreeStructure fs = free_structure(inst, fc);
    if (has_free_cycle(fs)) throw ValidationError("frozen configuration has a free cycle");
    ClusterWeight cw{1, inst.n()};
    for (auto& p : fs.pieces) cw.product *= piece_extensions(inst, fc, p);
    return cw;
}

}  // namespace naesat
