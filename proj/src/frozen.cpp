#include "naesat/frozen.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "naesat/errors.hpp"
#include "naesat/exact.hpp"

namespace naesat {

int FrozenConfig::free_count() const {
    return static_cast<int>(std::count(labels.begin(), labels.end(), kFree));
}

std::string FrozenConfig::text() const {
    std::string s;
    for (auto l : labels) s += l == kFree ? 'f' : static_cast<char>('0' + l);
    return s;
}

std::string FrozenConfig::digest() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text()) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

FrozenConfig negate(const FrozenConfig& fc) {
    FrozenConfig out = fc;
    for (auto& l : out.labels)
        if (l != kFree) l ^= 1;
    return out;
}

uint8_t adjusted(const Instance& inst, const FrozenConfig& fc, int i) {
    uint8_t x = fc.labels[inst.var_of(i)];
    return x == kFree ? kFree : static_cast<uint8_t>(x ^ inst.literal(i));
}

int others_constant(const Instance& inst, const FrozenConfig& fc, int i) {
    int k = inst.k();
    int slot = inst.slot(i);
    int base = slot - slot % k;
    int c = -1;
    for (int s = base; s < base + k; ++s) {
        if (s == slot) continue;
        uint8_t y = adjusted(inst, fc, inst.edge_at(s));
        if (y == kFree) return -1;
        if (c == -1) c = y;
        else if (c != y) return -1;
    }
    return c;
}

bool is_forcing(const Instance& inst, const FrozenConfig& fc, int i) {
    uint8_t y = adjusted(inst, fc, i);
    if (y == kFree) return false;
    int c = others_constant(inst, fc, i);
    return c != -1 && c != y;
}

bool clause_separating(const Instance& inst, const FrozenConfig& fc, int a) {
    int seen = 0;
    for (int s = a * inst.k(); s < (a + 1) * inst.k(); ++s) {
        uint8_t y = adjusted(inst, fc, inst.edge_at(s));
        if (y != kFree) seen |= 1 << y;
    }
    return seen == 3;
}

bool clause_violated(const Instance& inst, const FrozenConfig& fc, int a) {
    int seen = 0;
    for (int s = a * inst.k(); s < (a + 1) * inst.k(); ++s) {
        uint8_t y = adjusted(inst, fc, inst.edge_at(s));
        if (y == kFree) return false;
        seen |= 1 << y;
    }
    return seen != 3;
}

namespace {

bool check_solution(const Instance& inst, const Assignment& x) {
    if (!eval_nae(inst, x)) throw InputError("assignment is not a solution");
    return true;
}

bool flip_is_free(const Instance& inst, FrozenConfig& fc, int v) {
    uint8_t old = fc.labels[v];
    fc.labels[v] ^= 1;
    bool ok = true;
    for (int i = v * inst.d(); i < (v + 1) * inst.d() && ok; ++i)
        if (clause_violated(inst, fc, inst.clause_of(i))) ok = false;
    fc.labels[v] = old;
    return ok;
}

}  // namespace

FrozenConfig coarsen(const Instance& inst, const Assignment& x, const std::vector<int>& order) {
    check_solution(inst, x);
    FrozenConfig fc{Assignment(x)};
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v : order) {
            if (fc.labels[v] == kFree) continue;
            if (flip_is_free(inst, fc, v)) {
                fc.labels[v] = kFree;
                changed = true;
            }
        }
    }
    return fc;
}

FrozenConfig coarsen(const Instance& inst, const Assignment& x) {
    std::vector<int> order(inst.n());
    std::iota(order.begin(), order.end(), 0);
    return coarsen(inst, x, order);
}

FrozenConfig coarsen_edges(const Instance& inst, const Assignment& x) {
    check_solution(inst, x);
    FrozenConfig fc{Assignment(x)};
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v = 0; v < inst.n(); ++v) {
            if (fc.labels[v] == kFree) continue;
            bool forced = false;
            for (int i = v * inst.d(); i < (v + 1) * inst.d() && !forced; ++i) forced = is_forcing(inst, fc, i);
            if (!forced) {
                fc.labels[v] = kFree;
                changed = true;
            }
        }
    }
    return fc;
}

Classification classify_clauses(const Instance& inst, const FrozenConfig& fc) {
    Validation val = validate_frozen(inst, fc);
    if (!val.ok) throw ValidationError(val.diagnostics.front());
    Classification c;
    c.separating.resize(inst.m());
    c.forcing.resize(inst.edges());
    for (int a = 0; a < inst.m(); ++a) c.separating[a] = clause_separating(inst, fc, a);
    for (int i = 0; i < inst.edges(); ++i) c.forcing[i] = is_forcing(inst, fc, i);
    return c;
}

Validation validate_frozen(const Instance& inst, const FrozenConfig& fc) {
    Validation out;
    if (static_cast<int>(fc.labels.size()) != inst.n()) {
        out.ok = false;
        out.diagnostics.push_back("label vector length differs from n");
        return out;
    }
    for (int a = 0; a < inst.m(); ++a)
        if (clause_violated(inst, fc, a)) {
            out.ok = false;
            out.diagnostics.push_back("clause " + std::to_string(a) + " violated");
        }
    for (int v = 0; v < inst.n(); ++v) {
        bool frozen = fc.labels[v] != kFree;
        bool witness = false;
        for (int i = v * inst.d(); i < (v + 1) * inst.d() && !witness; ++i)
            witness = frozen ? is_forcing(inst, fc, i) : others_constant(inst, fc, i) != -1;
        if (frozen && !witness) {
            out.ok = false;
            out.diagnostics.push_back("frozen variable " + std::to_string(v) + " has no forcing edge");
        }
        if (!frozen && witness) {
            out.ok = false;
            out.diagnostics.push_back("free variable " + std::to_string(v) + " is forced");
        }
    }
    return out;
}

std::vector<FrozenConfig> valid_frozen_configs(const Instance& inst) {
    if (inst.n() > 16) throw CapacityError("frozen configuration sweep needs n <= 16");
    std::vector<FrozenConfig> out;
    FrozenConfig fc{std::vector<uint8_t>(inst.n(), 0)};
    while (true) {
        if (validate_frozen(inst, fc).ok) out.push_back(fc);
        int v = 0;
        while (v < inst.n() && fc.labels[v] == 2) fc.labels[v++] = 0;
        if (v == inst.n()) break;
        fc.labels[v]++;
    }
    return out;
}

FreeStructure free_structure(const Instance& inst, const FrozenConfig& fc) {
    FreeStructure fs;
    fs.piece_of_var.assign(inst.n(), -1);
    fs.piece_of_clause.assign(inst.m(), -1);
    std::vector<uint8_t> sep(inst.m());
    for (int a = 0; a < inst.m(); ++a) sep[a] = clause_separating(inst, fc, a);
    int d = inst.d(), k = inst.k();
    for (int s = 0; s < inst.n(); ++s) {
        if (fc.labels[s] != kFree || fs.piece_of_var[s] != -1) continue;
        int id = static_cast<int>(fs.pieces.size());
        fs.pieces.emplace_back();
        Piece& p = fs.pieces.back();
        std::vector<int> vstack{s}, cstack;
        fs.piece_of_var[s] = id;
        while (!vstack.empty() || !cstack.empty()) {
            if (!vstack.empty()) {
                int v = vstack.back();
                vstack.pop_back();
                p.vars.push_back(v);
                for (int i = v * d; i < (v + 1) * d; ++i) {
                    int a = inst.clause_of(i);
                    if (sep[a]) {
                        p.s_boundary.push_back(i);
                        continue;
                    }
                    p.internal.push_back(i);
                    if (fs.piece_of_clause[a] == -1) {
                        fs.piece_of_clause[a] = id;
                        cstack.push_back(a);
                    }
                }
            } else {
                int a = cstack.back();
                cstack.pop_back();
                p.clauses.push_back(a);
                for (int s2 = a * k; s2 < (a + 1) * k; ++s2) {
                    int i = inst.edge_at(s2);
                    int u = inst.var_of(i);
                    if (fc.labels[u] != kFree) {
                        p.b_boundary.push_back(i);
                    } else if (fs.piece_of_var[u] == -1) {
                        fs.piece_of_var[u] = id;
                        vstack.push_back(u);
                    }
                }
            }
        }
        std::sort(p.vars.begin(), p.vars.end());
        std::sort(p.clauses.begin(), p.clauses.end());
        std::sort(p.internal.begin(), p.internal.end());
        std::sort(p.s_boundary.begin(), p.s_boundary.end());
        std::sort(p.b_boundary.begin(), p.b_boundary.end());
    }
    return fs;
}

int FreeStructure::eta(const Instance& inst, const FrozenConfig& fc, int p, int label) const {
    const Piece& pc = pieces[p];
    if (label == 2) return static_cast<int>(pc.s_boundary.size());
    int c = 0;
    for (int i : pc.b_boundary) c += fc.labels[inst.var_of(i)] == label;
    return c;
}

bool has_free_cycle(const FreeStructure& fs) {
    return std::any_of(fs.pieces.begin(), fs.pieces.end(), [](const Piece& p) { return p.cyclic(); });
}

int multicyclic_edge_count(const FreeStructure& fs) {
    int c = 0;
    for (auto& p : fs.pieces)
        if (p.cyclic()) c += p.gamma();
    return c;
}

int cyclic_piece_count(const FreeStructure& fs) {
    int c = 0;
    for (auto& p : fs.pieces) c += p.cyclic();
    return c;
}

mpz_class piece_extensions(const Instance& inst, const FrozenConfig& fc, const Piece& p) {
    int v = p.v();
    if (v > 20) throw CapacityError("piece with more than 20 variables");
    std::map<int, int> local;
    for (int i = 0; i < v; ++i) local[p.vars[i]] = i;
    int k = inst.k();
    // per clause: list of (local var or -1, fixed adjusted value or literal)
    struct Slot {
        int var;
        uint8_t bit;
    };
    std::vector<std::vector<Slot>> cl;
    for (int a : p.clauses) {
        std::vector<Slot> row;
        for (int s = a * k; s < (a + 1) * k; ++s) {
            int i = inst.edge_at(s);
            int u = inst.var_of(i);
            if (fc.labels[u] == kFree) row.push_back({local.at(u), inst.literal(i)});
            else row.push_back({-1, static_cast<uint8_t>(fc.labels[u] ^ inst.literal(i))});
        }
        cl.push_back(std::move(row));
    }
    uint64_t count = 0;
    for (uint64_t mask = 0; mask < (1ULL << v); ++mask) {
        bool ok = true;
        for (auto& row : cl) {
            int seen = 0;
            for (auto& s : row) seen |= 1 << (s.var < 0 ? s.bit : (((mask >> s.var) & 1) ^ s.bit));
            if (seen != 3) {
                ok = false;
                break;
            }
        }
        count += ok;
    }
    return mpz_class(static_cast<unsigned long>(count));
}

mpz_class extension_count(const Instance& inst, const FrozenConfig& fc, const FreeStructure& fs) {
    for (int a = 0; a < inst.m(); ++a)
        if (fs.piece_of_clause[a] == -1 && clause_violated(inst, fc, a)) return 0;
    mpz_class total = 1;
    for (auto& p : fs.pieces) total *= piece_extensions(inst, fc, p);
    return total;
}

mpz_class brute_size(const Instance& inst, const FrozenConfig& fc) {
    std::vector<int> fv;
    for (int v = 0; v < inst.n(); ++v)
        if (fc.labels[v] == kFree) fv.push_back(v);
    if (fv.size() > 24) throw CapacityError("more than 24 free variables");
    Assignment x(inst.n());
    for (int v = 0; v < inst.n(); ++v) x[v] = fc.labels[v] == kFree ? 0 : fc.labels[v];
    unsigned long count = 0;
    for (uint64_t mask = 0; mask < (1ULL << fv.size()); ++mask) {
        for (size_t j = 0; j < fv.size(); ++j) x[fv[j]] = (mask >> j) & 1;
        count += eval_nae(inst, x);
    }
    return mpz_class(count);
}

PieceClass piece_class(const Instance& inst, const FrozenConfig& fc, const Piece& p) {
    PieceClass pc;
    pc.v = p.v();
    pc.f = p.f();
    pc.e = p.e();
    pc.eta_s = static_cast<int>(p.s_boundary.size());
    for (int i : p.b_boundary) (fc.labels[inst.var_of(i)] ? pc.eta_b1 : pc.eta_b0)++;
    std::map<int, int> lv, lc;
    for (int i = 0; i < pc.v; ++i) lv[p.vars[i]] = i;
    for (int i = 0; i < pc.f; ++i) lc[p.clauses[i]] = i;
    // internal edges (var, clause, literal); boundary per clause (color, literal)
    std::vector<std::tuple<int, int, int>> edges;
    for (int i : p.internal) edges.emplace_back(lv.at(inst.var_of(i)), lc.at(inst.clause_of(i)), inst.literal(i));
    std::vector<int> s_count(pc.v, 0);
    for (int i : p.s_boundary) s_count[lv.at(inst.var_of(i))]++;
    std::vector<std::vector<std::pair<int, int>>> bnd(pc.f);
    for (int i : p.b_boundary)
        bnd[lc.at(inst.clause_of(i))].emplace_back(fc.labels[inst.var_of(i)], inst.literal(i));
    for (auto& b : bnd) std::sort(b.begin(), b.end());

    double perms = 1;
    for (int i = 2; i <= pc.v; ++i) perms *= i;
    for (int i = 2; i <= pc.f; ++i) perms *= i;
    if (perms > 2e6) throw CapacityError("piece too large for canonicalization");

    auto encode = [&](const std::vector<int>& pv, const std::vector<int>& pf) {
        // pv[old] = new index
        std::vector<std::vector<std::pair<int, int>>> per_var(pc.v);
        for (auto& [u, a, l] : edges) per_var[pv[u]].emplace_back(pf[a], l);
        std::vector<int> sc(pc.v);
        for (int u = 0; u < pc.v; ++u) sc[pv[u]] = s_count[u];
        std::vector<const std::vector<std::pair<int, int>>*> bc(pc.f);
        for (int a = 0; a < pc.f; ++a) bc[pf[a]] = &bnd[a];
        std::ostringstream os;
        for (int u = 0; u < pc.v; ++u) {
            auto& row = per_var[u];
            std::sort(row.begin(), row.end());
            os << 'v' << sc[u];
            for (auto& [a, l] : row) os << ',' << a << (l ? '-' : '+');
            os << ';';
        }
        for (int a = 0; a < pc.f; ++a) {
            os << 'c';
            for (auto& [x, l] : *bc[a]) os << x << l;
            os << ';';
        }
        return os.str();
    };
    std::vector<int> pv(pc.v), pf(pc.f);
    std::iota(pv.begin(), pv.end(), 0);
    std::string best;
    long hits = 0;
    do {
        std::iota(pf.begin(), pf.end(), 0);
        do {
            std::string s = encode(pv, pf);
            if (best.empty() || s < best) {
                best = s;
                hits = 1;
            } else if (s == best) {
                ++hits;
            }
        } while (std::next_permutation(pf.begin(), pf.end()));
    } while (std::next_permutation(pv.begin(), pv.end()));
    pc.key = best;

    mpz_class aut = hits;
    std::map<std::tuple<int, int, int>, int> mult;
    for (auto& e : edges) mult[e]++;
    for (auto& [e, c] : mult) aut *= factorial(c);
    for (int c : s_count) aut *= factorial(c);
    for (auto& b : bnd) {
        std::map<std::pair<int, int>, int> bm;
        for (auto& x : b) bm[x]++;
        for (auto& [x, c] : bm) aut *= factorial(c);
    }
    pc.aut = aut;
    return pc;
}

}  // namespace naesat
