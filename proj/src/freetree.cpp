#include "naesat/freetree.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "naesat/coloring.hpp"
#include "naesat/errors.hpp"
#include "naesat/exact.hpp"
#include "naesat/parallel.hpp"

namespace naesat {

namespace {

struct Adjacency {
    std::vector<std::vector<int>> at_var, at_clause;
};

Adjacency adjacency(const FreeTree& t) {
    Adjacency adj{std::vector<std::vector<int>>(t.v), std::vector<std::vector<int>>(t.f)};
    for (int e = 0; e < t.e(); ++e) {
        adj.at_var[t.edges[e].var].push_back(e);
        adj.at_clause[t.edges[e].clause].push_back(e);
    }
    return adj;
}

void check_shape(const FreeTree& t) {
    if (t.v < 1) throw InputError("free tree needs a variable");
    if (static_cast<int>(t.s_count.size()) != t.v || static_cast<int>(t.bound.size()) != t.f)
        throw InputError("free tree label arrays do not match its size");
    if (t.e() != t.v + t.f - 1) throw InputError("free tree edge count is not v + f - 1");
    Adjacency adj = adjacency(t);
    for (int u = 0; u < t.v; ++u)
        if (static_cast<int>(adj.at_var[u].size()) + t.s_count[u] != t.d)
            throw InputError("variable " + std::to_string(u) + " does not have degree d");
    for (int a = 0; a < t.f; ++a) {
        if (adj.at_clause[a].size() < 2)
            throw InputError("clause " + std::to_string(a) + " has internal degree below 2");
        if (static_cast<int>(adj.at_clause[a].size() + t.bound[a].size()) != t.k)
            throw InputError("clause " + std::to_string(a) + " does not have degree k");
    }
    // connectivity (with e = v + f - 1 this makes it a tree)
    std::vector<char> seen_v(t.v, 0), seen_c(t.f, 0);
    std::vector<int> stack{0};
    seen_v[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int e : adj.at_var[u]) {
            int a = t.edges[e].clause;
            if (seen_c[a]) continue;
            seen_c[a] = 1;
            ++reached;
            for (int e2 : adj.at_clause[a]) {
                int w = t.edges[e2].var;
                if (!seen_v[w]) {
                    seen_v[w] = 1;
                    ++reached;
                    stack.push_back(w);
                }
            }
        }
    }
    if (reached != t.v + t.f) throw InputError("free tree is not connected");
}

void compute_spins(FreeTree& t, SpinTable& tab) {
    check_shape(t);
    if (tab.d() != t.d || tab.k() != t.k) throw ConfigError("spin table (d,k) differs from tree");
    Adjacency adj = adjacency(t);
    t.dot.assign(t.e(), -1);
    t.hat.assign(t.e(), -1);
    std::function<int(int)> get_dot, get_hat;
    get_dot = [&](int e) {
        if (t.dot[e] >= 0) return t.dot[e];
        int u = t.edges[e].var;
        std::vector<int> hats(t.s_count[u], tab.hs());
        for (int e2 : adj.at_var[u])
            if (e2 != e) hats.push_back(get_hat(e2));
        int r = tab.dot_map(hats);
        if (r < 0 || !tab.is_join(r)) throw InputError("variable " + std::to_string(u) + " is not free");
        return t.dot[e] = r;
    };
    get_hat = [&](int e) {
        if (t.hat[e] >= 0) return t.hat[e];
        int a = t.edges[e].clause;
        std::vector<int> dots;
        for (auto& b : t.bound[a]) dots.push_back((b.color ^ b.lit) ? tab.d1() : tab.d0());
        for (int e2 : adj.at_clause[a])
            if (e2 != e) dots.push_back(tab.literal_flip(get_dot(e2), t.edges[e2].lit));
        int h = tab.hat_map(dots);
        if (h == tab.hs()) throw InputError("clause " + std::to_string(a) + " is separating");
        int r = tab.literal_flip(h, t.edges[e].lit);
        if (!tab.is_join(r)) throw InputError("clause " + std::to_string(a) + " forces a variable");
        return t.hat[e] = r;
    };
    for (int e = 0; e < t.e(); ++e) {
        get_dot(e);
        get_hat(e);
    }
    t.s_dot.assign(t.v, -1);
    for (int u = 0; u < t.v; ++u) {
        if (t.s_count[u] == 0) continue;
        std::vector<int> hats(t.s_count[u] - 1, tab.hs());
        for (int e : adj.at_var[u]) hats.push_back(t.hat[e]);
        t.s_dot[u] = tab.dot_map(hats);
    }
}

std::string edge_label(const FreeTree& t, const SpinTable& tab, int e) {
    return tab[t.dot[e]].key + "|" + tab[t.hat[e]].key;
}

std::string encode_var(const FreeTree& t, const SpinTable& tab, const Adjacency& adj, int u, int pe);

std::string encode_clause(const FreeTree& t, const SpinTable& tab, const Adjacency& adj, int a, int pe) {
    int nb[2] = {0, 0};
    for (auto& b : t.bound[a]) nb[b.color]++;
    std::vector<std::string> kids;
    for (int e : adj.at_clause[a])
        if (e != pe) kids.push_back(edge_label(t, tab, e) + encode_var(t, tab, adj, t.edges[e].var, e));
    std::sort(kids.begin(), kids.end());
    std::string s = "c" + std::to_string(nb[0]) + "." + std::to_string(nb[1]) + "(";
    for (auto& x : kids) s += "[" + x + "]";
    return s + ")";
}

std::string encode_var(const FreeTree& t, const SpinTable& tab, const Adjacency& adj, int u, int pe) {
    std::vector<std::string> kids;
    for (int e : adj.at_var[u])
        if (e != pe) kids.push_back(edge_label(t, tab, e) + encode_clause(t, tab, adj, t.edges[e].clause, e));
    std::sort(kids.begin(), kids.end());
    std::string s = "v" + std::to_string(t.s_count[u]) + "(";
    for (auto& x : kids) s += "[" + x + "]";
    return s + ")";
}

mpz_class multinomial(const std::map<std::string, int>& counts, int total) {
    mpz_class r = factorial(total);
    for (auto& [lab, c] : counts) r /= factorial(c);
    return r;
}

bool nae_ok(const FreeTree& t, const Adjacency& adj, uint64_t x) {
    for (int a = 0; a < t.f; ++a) {
        bool s0 = false, s1 = false;
        for (auto& b : t.bound[a]) ((b.color ^ b.lit) ? s1 : s0) = true;
        for (int e : adj.at_clause[a]) {
            int val = static_cast<int>((x >> t.edges[e].var) & 1) ^ t.edges[e].lit;
            (val ? s1 : s0) = true;
        }
        if (!(s0 && s1)) return false;
    }
    return true;
}

std::vector<uint64_t> solution_masks(const FreeTree& t) {
    if (t.v > 24) throw CapacityError("free tree too large for exhaustive counting");
    Adjacency adj = adjacency(t);
    std::vector<uint64_t> out;
    for (uint64_t x = 0; x < (uint64_t{1} << t.v); ++x)
        if (nae_ok(t, adj, x)) out.push_back(x);
    return out;
}

void clear_cache(FreeTree& t) {
    t.key.clear();
    t.dot.clear();
    t.hat.clear();
    t.s_dot.clear();
}

// label-preserving automorphisms of the unliteraled shape, acting on vertices and half-edges
mpz_class shape_automorphisms(const FreeTree& t) {
    auto nb = [&](int a, int c) {
        int n = 0;
        for (auto& b : t.bound[a]) n += b.color == c;
        return n;
    };
    std::multiset<std::pair<int, int>> edges;
    for (auto& e : t.edges) edges.insert({e.var, e.clause});
    std::vector<int> pv(t.v), pc(t.f);
    std::iota(pv.begin(), pv.end(), 0);
    long hits = 0;
    do {
        bool ok = true;
        for (int u = 0; u < t.v && ok; ++u) ok = t.s_count[u] == t.s_count[pv[u]];
        if (!ok) continue;
        std::iota(pc.begin(), pc.end(), 0);
        do {
            bool good = true;
            for (int a = 0; a < t.f && good; ++a) good = nb(a, 0) == nb(pc[a], 0) && nb(a, 1) == nb(pc[a], 1);
            if (!good) continue;
            std::multiset<std::pair<int, int>> img;
            for (auto& e : t.edges) img.insert({pv[e.var], pc[e.clause]});
            hits += img == edges;
        } while (std::next_permutation(pc.begin(), pc.end()));
    } while (std::next_permutation(pv.begin(), pv.end()));
    mpz_class aut = hits;
    for (int u = 0; u < t.v; ++u) aut *= factorial(t.s_count[u]);
    for (int a = 0; a < t.f; ++a) aut *= factorial(nb(a, 0)) * factorial(nb(a, 1));
    return aut;
}

}  // namespace

// eta counts, J_t and the clause indicator averages; spins must be current
void fill_spin_stats(FreeTree& t, SpinTable& tab) {
    t.eta_b0 = t.eta_b1 = 0;
    for (auto& bs : t.bound)
        for (auto& b : bs) (b.color ? t.eta_b1 : t.eta_b0)++;
    t.eta_s = std::accumulate(t.s_count.begin(), t.s_count.end(), 0);
    t.J = embedding_number(t, tab);
    Adjacency adj = adjacency(t);
    t.vhat_prod = 1;
    for (int a = 0; a < t.f; ++a) {
        std::vector<ColorSpin> at;
        for (auto& b : t.bound[a]) at.push_back(ColorSpin{static_cast<uint8_t>(B0 + b.color), -1, -1});
        for (int e : adj.at_clause[a]) at.push_back(ColorSpin{F, t.dot[e], t.hat[e]});
        t.vhat_prod *= vhat_colors(at, tab);
    }
}

FreeTree single_variable_tree(int d, int k) {
    FreeTree t;
    t.d = d;
    t.k = k;
    t.v = 1;
    t.s_count = {d};
    return t;
}

std::string tree_key(FreeTree& t, SpinTable& tab) {
    compute_spins(t, tab);
    Adjacency adj = adjacency(t);
    std::string best;
    for (int u = 0; u < t.v; ++u) {
        std::string s = encode_var(t, tab, adj, u, -1);
        if (u == 0 || s < best) best = s;
    }
    return t.key = best;
}

FreeTree canonicalize(FreeTree t, SpinTable& tab) {
    tree_key(t, tab);
    fill_spin_stats(t, tab);
    t.w_lit = tree_size_brute(t);
    auto st = tree_overlap_stats(t);
    t.ham = st.ham;
    t.overlap = st.overlap;
    return t;
}

std::vector<std::vector<uint8_t>> tree_solutions(const FreeTree& t) {
    std::vector<std::vector<uint8_t>> out;
    for (uint64_t x : solution_masks(t)) {
        std::vector<uint8_t> s(t.v);
        for (int u = 0; u < t.v; ++u) s[u] = (x >> u) & 1;
        out.push_back(s);
    }
    return out;
}

mpz_class tree_size_brute(const FreeTree& t) { return mpz_class(static_cast<unsigned long>(solution_masks(t).size())); }

mpq_class tree_size_phi(const FreeTree& t, const SpinTable& tab) {
    Adjacency adj = adjacency(t);
    mpq_class w = 1;
    for (int u = 0; u < t.v; ++u) {
        std::vector<int> hats(t.s_count[u], tab.hs());
        for (int e : adj.at_var[u]) hats.push_back(t.hat[e]);
        w *= phi_dot(hats, tab);
        if (t.s_count[u] > 0) w *= mpq_pow(phi_bar(t.s_dot[u], tab.hs(), tab), t.s_count[u]);
    }
    for (int e = 0; e < t.e(); ++e) w *= phi_bar(t.dot[e], t.hat[e], tab);
    for (int a = 0; a < t.f; ++a) {
        std::vector<int> dots;
        for (auto& b : t.bound[a]) dots.push_back((b.color ^ b.lit) ? tab.d1() : tab.d0());
        for (int e : adj.at_clause[a]) dots.push_back(tab.literal_flip(t.dot[e], t.edges[e].lit));
        w *= phi_hat_lit(dots, tab);
    }
    return w;
}

// message spins see boundary values only after literal adjustment, so equal spins can hide
// different boundary colours; the label of an edge is the labelled subtree on each side
static std::vector<std::string> refined_labels(const FreeTree& t, const SpinTable& tab) {
    Adjacency adj = adjacency(t);
    std::vector<std::string> lab(t.e());
    for (int e = 0; e < t.e(); ++e)
        lab[e] = encode_var(t, tab, adj, t.edges[e].var, e) + "#" + encode_clause(t, tab, adj, t.edges[e].clause, e);
    return lab;
}

mpq_class embedding_number(const FreeTree& t, const SpinTable& tab) {
    Adjacency adj = adjacency(t);
    auto lab = refined_labels(t, tab);
    mpz_class num = 1;
    for (int u = 0; u < t.v; ++u) {
        std::map<std::string, int> c;
        for (int e : adj.at_var[u]) c[lab[e]]++;
        if (t.s_count[u] > 0) c["S"] += t.s_count[u];
        num *= multinomial(c, t.d);
    }
    for (int a = 0; a < t.f; ++a) {
        std::map<std::string, int> c;
        for (int e : adj.at_clause[a]) c[lab[e]]++;
        for (auto& b : t.bound[a]) c[b.color ? "B1" : "B0"]++;
        num *= multinomial(c, t.k);
    }
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), t.d, t.v - 1);
    mpz_class kf;
    mpz_ui_pow_ui(kf.get_mpz_t(), t.k, t.f);
    mpq_class J(num, den * kf);
    J.canonicalize();
    return J;
}

mpq_class embedding_number_brute(const FreeTree& t, const SpinTable& tab) {
    Adjacency adj = adjacency(t);
    // items: internal edge index, or -1 (S) at variables, -2 - color (boundary) at clauses
    std::vector<std::vector<int>> vp(t.v), cp(t.f);
    double total = 1;
    for (int u = 0; u < t.v; ++u) {
        vp[u] = adj.at_var[u];
        vp[u].insert(vp[u].end(), t.s_count[u], -1);
        std::sort(vp[u].begin(), vp[u].end());
        for (int i = 2; i <= t.d; ++i) total *= i;
    }
    for (int a = 0; a < t.f; ++a) {
        cp[a] = adj.at_clause[a];
        for (auto& b : t.bound[a]) cp[a].push_back(-2 - b.color);
        std::sort(cp[a].begin(), cp[a].end());
        for (int i = 2; i <= t.k; ++i) total *= i;
    }
    if (total > 2e7) throw CapacityError("embedding enumeration exceeds 2e7 port assignments");

    std::vector<std::string> lab(t.e());
    for (int e = 0; e < t.e(); ++e) lab[e] = edge_label(t, tab, e);
    std::function<void(std::string&, int, int)> enc_var;
    std::function<void(std::string&, int, int)> enc_clause = [&](std::string& s, int a, int pe) {
        s += 'c';
        for (int it : cp[a]) {
            if (it < 0) s += it == -2 ? "B0;" : "B1;";
            else if (it == pe) s += "P;";
            else {
                s += "[" + lab[it] + ":";
                enc_var(s, t.edges[it].var, it);
                s += "]";
            }
        }
    };
    enc_var = [&](std::string& s, int u, int pe) {
        s += 'v';
        for (int it : vp[u]) {
            if (it < 0) s += "S;";
            else if (it == pe) s += "P;";
            else {
                s += "[" + lab[it] + ":";
                enc_clause(s, t.edges[it].clause, it);
                s += "]";
            }
        }
    };

    std::set<std::string> seen;
    int slots = t.v + t.f;
    std::function<void(int)> rec = [&](int i) {
        if (i == slots) {
            std::string best;
            for (int r = 0; r < t.v; ++r) {
                std::string s;
                enc_var(s, r, -1);
                if (r == 0 || s < best) best = s;
            }
            seen.insert(best);
            return;
        }
        auto& vec = i < t.v ? vp[i] : cp[i - t.v];
        std::sort(vec.begin(), vec.end());
        do rec(i + 1);
        while (std::next_permutation(vec.begin(), vec.end()));
    };
    rec(0);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), t.d, t.v - 1);
    mpz_class kf;
    mpz_ui_pow_ui(kf.get_mpz_t(), t.k, t.f);
    mpq_class J(mpz_class(static_cast<unsigned long>(seen.size())), den * kf);
    J.canonicalize();
    return J;
}

OverlapStats tree_overlap_stats(const FreeTree& t) {
    auto sols = solution_masks(t);
    mpz_class h = 0;
    for (uint64_t x : sols)
        for (uint64_t y : sols) h += static_cast<unsigned long>(__builtin_popcountll(x ^ y));
    mpz_class n = static_cast<unsigned long>(sols.size());
    OverlapStats st;
    st.ham = mpq_class(h, n * n);
    st.ham.canonicalize();
    st.overlap = t.v - 2 * st.ham;
    return st;
}

FreeTree flip_boundary(const FreeTree& t) {
    FreeTree out;
    out.d = t.d;
    out.k = t.k;
    out.v = t.v;
    out.f = t.f;
    out.edges = t.edges;
    out.s_count = t.s_count;
    out.bound = t.bound;
    for (auto& bs : out.bound)
        for (auto& b : bs) b.color ^= 1;
    return out;
}

int TreeCatalog::count(int v) const {
    int c = 0;
    for (auto& t : trees) c += t.v == v;
    return c;
}

TreeCatalog enumerate_catalog(int d, int k, int L, SpinTable& tab, size_t budget) {
    if (L < 1) throw ConfigError("catalog cutoff L must be at least 1");
    if (d < 1 || k < 2) throw ConfigError("catalog needs d >= 1 and k >= 2");
    std::vector<std::map<std::string, FreeTree>> level(L + 1);
    FreeTree root = single_variable_tree(d, k);
    tree_key(root, tab);
    level[1].emplace(root.key, root);
    size_t total = 1;
    for (int v = 1; v < L; ++v) {
        for (auto& [key, base] : level[v]) {
            for (int u = 0; u < base.v; ++u) {
                if (base.s_count[u] == 0) continue;
                for (int j = 2; j <= k && v + j - 1 <= L; ++j) {
                    for (int nb1 = 0; nb1 <= k - j; ++nb1) {
                        for (int lits = 0; lits < (1 << j); ++lits) {
                            FreeTree t = base;
                            clear_cache(t);
                            int a = t.f++;
                            t.s_count[u]--;
                            t.edges.push_back({u, a, lits & 1});
                            for (int i = 1; i < j; ++i) {
                                t.edges.push_back({t.v, a, (lits >> i) & 1});
                                t.s_count.push_back(d - 1);
                                ++t.v;
                            }
                            // boundary adjusted values normalized to 0, so the literal equals the color
                            std::vector<Boundary> bs;
                            for (int i = 0; i < k - j; ++i) {
                                int c = i < nb1 ? 1 : 0;
                                bs.push_back({c, c});
                            }
                            t.bound.push_back(bs);
                            try {
                                tree_key(t, tab);
                            } catch (const InputError&) {
                                continue;
                            }
                            if (level[t.v].count(t.key)) continue;
                            level[t.v].emplace(t.key, std::move(t));
                            if (++total > budget)
                                throw CapacityError("partial catalog: more than " + std::to_string(budget) +
                                                    " trees with v <= " + std::to_string(L));
                        }
                    }
                }
            }
        }
    }
    TreeCatalog cat;
    cat.d = d;
    cat.k = k;
    cat.L = L;
    cat.complete.assign(L + 1, true);
    for (int v = 1; v <= L; ++v)
        for (auto& [key, t] : level[v]) cat.trees.push_back(t);
    // spin-dependent statistics use the shared table; exhaustive ones run in parallel
    std::vector<OverlapStats> st(cat.trees.size());
    std::vector<mpz_class> w(cat.trees.size());
    parallel_chunks(cat.trees.size(), [&](size_t i) {
        w[i] = tree_size_brute(cat.trees[i]);
        st[i] = tree_overlap_stats(cat.trees[i]);
    });
    for (size_t i = 0; i < cat.trees.size(); ++i) {
        auto& t = cat.trees[i];
        fill_spin_stats(t, tab);
        t.w_lit = w[i];
        t.ham = st[i].ham;
        t.overlap = st[i].overlap;
        cat.index[t.key] = static_cast<int>(i);
    }
    return cat;
}

WcomCheck w_vs_wcom_check(const FreeTree& t, SpinTable& tab, long double lambda) {
    WcomCheck r;
    r.exact = lambda == 0 || lambda == 1;
    int nbits = t.e();
    for (auto& bs : t.bound) nbits += static_cast<int>(bs.size());
    if (nbits > 20) throw CapacityError("literal enumeration exceeds 2^20");

    mpz_class dv, kf;
    mpz_ui_pow_ui(dv.get_mpz_t(), t.d, t.v - 1);
    mpz_ui_pow_ui(kf.get_mpz_t(), t.k, t.f);
    mpq_class base = mpq_class(dv * kf) * t.J * t.vhat_prod;

    mpq_class sum_exact = 0;
    long double sum = 0;
    for (long mask = 0; mask < (1L << nbits); ++mask) {
        FreeTree g = t;
        clear_cache(g);
        int bit = 0;
        for (auto& e : g.edges) e.lit = (mask >> bit++) & 1;
        for (auto& bs : g.bound)
            for (auto& b : bs) b.lit = (mask >> bit++) & 1;
        try {
            if (tree_key(g, tab) != t.key) continue;
        } catch (const InputError&) {
            continue;
        }
        mpz_class w = tree_size_brute(g);
        if (r.exact) sum_exact += lambda == 0 ? mpq_class(1) : mpq_class(w);
        sum += powl(static_cast<long double>(w.get_d()), lambda);
    }
    mpz_class pref = shape_automorphisms(t);
    mpz_class lab = 1;
    for (int i = 0; i < t.v; ++i) lab *= factorial(t.d);
    for (int i = 0; i < t.f; ++i) lab *= factorial(t.k);
    mpz_class two_kf = mpz_class(1) << (t.k * t.f);
    mpq_class scale(lab, pref * two_kf);
    scale.canonicalize();

    r.lhs = to_ld(base) * powl(static_cast<long double>(t.w_lit.get_d()), lambda);
    r.rhs = to_ld(scale) * sum;
    if (r.exact) {
        r.lhs_exact = lambda == 0 ? base : base * t.w_lit;
        r.rhs_exact = scale * sum_exact;
        r.ok = r.lhs_exact == r.rhs_exact;
    } else {
        r.ok = fabsl(r.lhs - r.rhs) <= 1e-12L * fabsl(r.rhs);
    }
    return r;
}

std::string catalog_jsonl(const TreeCatalog& cat) {
    std::ostringstream os;
    for (auto& t : cat.trees) {
        nlohmann::ordered_json j;
        j["key"] = t.key;
        j["v"] = t.v;
        j["f"] = t.f;
        j["e"] = t.e();
        j["eta_B0"] = t.eta_b0;
        j["eta_B1"] = t.eta_b1;
        j["eta_S"] = t.eta_s;
        j["J"] = {{"num", t.J.get_num().get_str()}, {"den", t.J.get_den().get_str()}};
        j["w_lit"] = t.w_lit.get_str();
        j["ham"] = {{"num", t.ham.get_num().get_str()}, {"den", t.ham.get_den().get_str()}};
        os << j.dump() << "\n";
    }
    return os.str();
}

}  // namespace naesat
