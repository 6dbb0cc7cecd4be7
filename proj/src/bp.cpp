#include "naesat/bp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "naesat/coloring.hpp"
#include "naesat/errors.hpp"
#include "naesat/exact.hpp"

namespace naesat {

namespace {

constexpr long double kNegInf = -std::numeric_limits<long double>::infinity();
const long double kLog2 = logl(2.0L);

long double safe_log(long double x) { return x > 0 ? logl(x) : kNegInf; }

long double log_sum_exp(const std::vector<long double>& xs) {
    long double mx = kNegInf;
    for (auto x : xs) mx = std::max(mx, x);
    if (mx == kNegInf) return kNegInf;
    long double s = 0;
    for (auto x : xs) s += expl(x - mx);
    return mx + logl(s);
}

long double log_binom(long double n, long double r) { return lgammal(n + 1) - lgammal(r + 1) - lgammal(n - r + 1); }

// nondecreasing multisets over [0, w.size()) with total weight in [wmin, wmax] and size in [smin, smax]
void for_multisets(const std::vector<int>& w, int wmin, int wmax, int smin, int smax,
                   const std::function<void(const Multiset&, int, int)>& fn) {
    Multiset cur;
    std::function<void(int, int, int)> rec = [&](int start, int wt, int sz) {
        if (wt >= wmin && sz >= smin) fn(cur, wt, sz);
        for (int i = start; i < static_cast<int>(w.size()); ++i) {
            int wt2 = wt, sz2 = sz, m = 0;
            while (wt2 + w[i] <= wmax && sz2 + 1 <= smax) {
                wt2 += w[i];
                ++sz2;
                ++m;
                cur.emplace_back(i, m);
                rec(i + 1, wt2, sz2);
                cur.pop_back();
            }
        }
    };
    rec(0, 0, 0);
}

long double log_multinomial(int n, const Multiset& ms, int rest) {
    long double r = lgammal(n + 1.0L) - lgammal(rest + 1.0L);
    for (auto& [i, m] : ms) r -= lgammal(m + 1.0L);
    return r;
}

long double ipow(long double x, int e) { return e == 0 ? 1.0L : powl(x, e); }

long double log_measure_prod(const Multiset& ms, const std::vector<long double>& q) {
    long double s = 0;
    for (auto& [i, m] : ms) s += m * safe_log(q[i]);
    return s;
}

}  // namespace

int BpSpace::dot_index(int id) const {
    auto it = dot_of.find(id);
    return it == dot_of.end() ? -1 : it->second;
}

int BpSpace::hat_index(int id) const {
    auto it = hat_of.find(id);
    return it == hat_of.end() ? -1 : it->second;
}

BpSpace build_space(SpinTable& tab, int L) {
    if (L < 1) throw ConfigError("truncation L must be at least 1");
    BpSpace sp;
    sp.d = tab.d();
    sp.k = tab.k();
    sp.L = L;
    int d = sp.d, k = sp.k;

    auto add_dot = [&](BpSpace::DotJoin j) {
        const SpinRec& rec = tab[j.id];
        j.logz = rec.logz;
        j.m0 = to_ld(rec.m0);
        j.m1 = to_ld(rec.m1);
        sp.dot_of[j.id] = static_cast<int>(sp.dots.size());
        sp.dots.push_back(std::move(j));
    };
    BpSpace::DotJoin ds;
    ds.id = tab.dot_join({{tab.hs(), d - 1}});
    ds.v = 1;
    ds.s_count = d - 1;
    add_dot(ds);

    for (int v = 2; v <= L; ++v) {
        std::vector<int> w;
        for (auto& x : sp.dots) w.push_back(x.v);
        std::vector<BpSpace::HatJoin> fresh;
        for_multisets(w, v - 1, v - 1, 1, k - 1, [&](const Multiset& ms, int, int sz) {
            int pad = k - 1 - sz;
            for (int pv = 0; pv < (pad ? 2 : 1); ++pv) {
                Multiset ch;
                for (auto& [i, m] : ms) ch.emplace_back(sp.dots[i].id, m);
                if (pad) ch.emplace_back(pv ? tab.d1() : tab.d0(), pad);
                BpSpace::HatJoin h;
                h.id = tab.hat_join(ch);
                h.v = v;
                h.dots = ms;
                h.pad = pad;
                h.pad_value = pv;
                h.log_multi = log_multinomial(k - 1, ms, pad);
                const SpinRec& rec = tab[h.id];
                h.logz = rec.logz;
                h.m0 = to_ld(rec.m0);
                h.m1 = to_ld(rec.m1);
                fresh.push_back(std::move(h));
            }
        });
        for (auto& h : fresh) {
            sp.hat_of[h.id] = static_cast<int>(sp.hats.size());
            sp.hats.push_back(std::move(h));
        }
        std::vector<int> wh;
        for (auto& x : sp.hats) wh.push_back(x.v - 1);
        std::vector<BpSpace::DotJoin> dfresh;
        for_multisets(wh, v - 1, v - 1, 1, d - 1, [&](const Multiset& ms, int, int sz) {
            Multiset ch;
            for (auto& [i, m] : ms) ch.emplace_back(sp.hats[i].id, m);
            int s = d - 1 - sz;
            if (s) ch.emplace_back(tab.hs(), s);
            BpSpace::DotJoin j;
            j.id = tab.dot_join(ch);
            j.v = v;
            j.hats = ms;
            j.s_count = s;
            j.log_multi = log_multinomial(d - 1, ms, s);
            dfresh.push_back(std::move(j));
        });
        for (auto& j : dfresh) add_dot(std::move(j));
    }
    for (auto& x : sp.dots) x.flip = sp.dot_index(tab.flip(x.id));
    for (auto& x : sp.hats) x.flip = sp.hat_index(tab.flip(x.id));
    for (auto& x : sp.dots)
        if (x.flip < 0) throw ValidationError("dotted join without its flip in the truncated space");
    for (auto& x : sp.hats)
        if (x.flip < 0) throw ValidationError("hatted join without its flip in the truncated space");

    std::vector<int> w;
    for (auto& x : sp.dots) w.push_back(x.v);
    for_multisets(w, 0, L, 2, k, [&](const Multiset& ms, int wt, int sz) {
        BpSpace::FreeTuple t;
        t.items = ms;
        t.size = sz;
        t.v = wt;
        t.log_orderings = log_multinomial(sz, ms, 0);
        for (auto& [i, m] : ms) {
            t.log_m0 += m * safe_log(sp.dots[i].m0);
            t.log_m1 += m * safe_log(sp.dots[i].m1);
        }
        sp.tuples.push_back(std::move(t));
    });
    std::vector<int> wh;
    for (auto& x : sp.hats) wh.push_back(x.v - 1);
    for_multisets(wh, 0, L - 1, 0, d, [&](const Multiset& ms, int wt, int sz) {
        BpSpace::HatTuple t;
        t.items = ms;
        t.size = sz;
        t.v = 1 + wt;
        for (auto& [i, m] : ms) {
            t.log_m0 += m * safe_log(sp.hats[i].m0);
            t.log_m1 += m * safe_log(sp.hats[i].m1);
        }
        sp.hat_tuples.push_back(std::move(t));
    });
    return sp;
}

long double DotMeasure::free_mass() const {
    long double s = 0;
    for (auto x : free) s += x;
    return s;
}

long double HatMeasure::mass() const {
    long double s = 2 * r + 2 * b + this->s;
    for (auto x : join) s += x;
    return s;
}

void symmetrize(const BpSpace& sp, DotMeasure& q) {
    for (size_t i = 0; i < q.free.size(); ++i) {
        size_t j = static_cast<size_t>(sp.dots[i].flip);
        if (j > i) {
            long double a = (q.free[i] + q.free[j]) / 2;
            q.free[i] = q.free[j] = a;
        }
    }
}

StepResult bp_step(const BpSpace& sp, const DotMeasure& q, long double lambda) {
    const int d = sp.d, k = sp.k;
    StepResult out;
    long double r = q.r, b = q.b, f = q.free_mass();

    // hatted side, unnormalized
    long double hr = ipow(b, k - 1);
    // separating rest, minus all-B rests where some adjusted value would appear once
    long double hb = (k - 1) * r * ipow(b, k - 2) + ipow(2 * b + f, k - 1) - ipow(b + f, k - 1) - k * ipow(b, k - 1);
    for (auto& t : sp.tuples) {
        if (t.size > k - 1) continue;
        long double lw = t.log_orderings + log_measure_prod(t.items, q.free);
        long double phi = -expm1l(t.log_m0);
        hb += expl(log_binom(k - 1, t.size) + lw) * ipow(b, k - 1 - t.size) * powl(phi, lambda);
    }
    long double hs = powl(2.0L, lambda) * (ipow(2 * b + f, k - 1) - 2 * ipow(b + f, k - 1) + ipow(f, k - 1));
    std::vector<long double> hj(sp.hats.size());
    long double lb = safe_log(b);
    for (size_t i = 0; i < sp.hats.size(); ++i) {
        auto& h = sp.hats[i];
        long double lv = lambda * h.logz + h.log_multi + log_measure_prod(h.dots, q.free) + (h.pad ? h.pad * lb : 0);
        hj[i] = expl(lv);
    }
    long double Zhat = 2 * hr + 2 * hb + hs;
    for (auto x : hj) Zhat += x;
    if (!(Zhat > 0)) throw ValidationError("degenerate truncation: empty hatted support");
    out.log_Zhat = logl(Zhat);
    out.hat.r = hr / Zhat;
    out.hat.b = hb / Zhat;
    out.hat.s = hs / Zhat;
    out.hat.join.resize(hj.size());
    for (size_t i = 0; i < hj.size(); ++i) out.hat.join[i] = hj[i] / Zhat;

    // dotted side in logs
    const HatMeasure& qh = out.hat;
    long double lrb = logl(qh.r + qh.b);
    long double lR = (d - 1) * lrb;
    long double lB = lR + log1pl(-expl((d - 1) * (safe_log(qh.b) - lrb)));
    std::vector<long double> lj(sp.dots.size());
    long double ls = safe_log(qh.s);
    for (size_t i = 0; i < sp.dots.size(); ++i) {
        auto& x = sp.dots[i];
        lj[i] = lambda * x.logz + x.log_multi + log_measure_prod(x.hats, qh.join) + (x.s_count ? x.s_count * ls : 0);
    }
    std::vector<long double> all = {kLog2 + lR, kLog2 + lB};
    all.insert(all.end(), lj.begin(), lj.end());
    long double lZ = log_sum_exp(all);
    if (lZ == kNegInf) throw ValidationError("degenerate truncation: empty dotted support");
    out.log_Zdot = lZ;
    out.dot.r = expl(lR - lZ);
    out.dot.b = expl(lB - lZ);
    out.dot.free.resize(lj.size());
    for (size_t i = 0; i < lj.size(); ++i) out.dot.free[i] = expl(lj[i] - lZ);
    symmetrize(sp, out.dot);
    return out;
}

long double l1_distance(const DotMeasure& a, const DotMeasure& b) {
    long double s = 2 * fabsl(a.r - b.r) + 2 * fabsl(a.b - b.b);
    for (size_t i = 0; i < a.free.size(); ++i) s += fabsl(a.free[i] - b.free[i]);
    return s;
}

DotMeasure near_frozen_init(const BpSpace& sp, long double eps) {
    DotMeasure q;
    q.r = eps;
    q.b = 0.5L - eps;
    q.free.assign(sp.dots.size(), 0);
    return q;
}

DotMeasure spread_init(const BpSpace& sp) {
    DotMeasure q;
    q.r = 0.2L;
    q.b = 0.2L;
    q.free.assign(sp.dots.size(), 0.2L / sp.dots.size());
    return q;
}

long double BpState::max_contraction_in_gamma() const {
    long double m = 0;
    for (size_t i = 0; i < contraction.size(); ++i)
        if (contraction_in_gamma[i]) m = std::max(m, contraction[i]);
    return m;
}

GammaReport gamma_check(const BpSpace& sp, const DotMeasure& q, long double C) {
    GammaReport g;
    g.C = C;
    for (size_t i = 0; i < q.free.size(); ++i)
        if (q.free[i] != q.free[sp.dots[i].flip]) g.symmetric = false;
    long double qr = 2 * q.r, qb = 2 * q.b, qf = q.free_mass();
    long double two_k = ldexpl(1.0L, sp.k);
    g.lower = (qr + two_k * qf) / C <= qb;
    g.upper = C / two_k < 1 && qb <= qr / (1 - C / two_k);
    return g;
}

BpState solve_fixed_point(const BpSpace& sp, const BpParams& p, std::optional<DotMeasure> init) {
    if (p.d != sp.d || p.k != sp.k || p.L != sp.L) throw ConfigError("parameters do not match the spin space");
    if (p.lambda < 0 || p.lambda > 1) throw ConfigError("lambda must lie in [0, 1]");
    if (p.damping < 0 || p.damping >= 1) throw ConfigError("damping must lie in [0, 1)");
    BpState st;
    st.params = p;
    DotMeasure q = init ? *init : near_frozen_init(sp);
    if (q.free.size() != sp.dots.size()) throw InputError("initial measure does not match the spin space");
    symmetrize(sp, q);
    std::vector<DotMeasure> iterates, images;
    std::vector<bool> inside;
    auto damp = [&](const DotMeasure& out, const DotMeasure& in) {
        DotMeasure nq = out;
        nq.r = (1 - p.damping) * out.r + p.damping * in.r;
        nq.b = (1 - p.damping) * out.b + p.damping * in.b;
        for (size_t i = 0; i < nq.free.size(); ++i) nq.free[i] = (1 - p.damping) * out.free[i] + p.damping * in.free[i];
        symmetrize(sp, nq);
        return nq;
    };
    for (int it = 1; it <= p.max_iter; ++it) {
        StepResult s = bp_step(sp, q, p.lambda);
        long double res = l1_distance(s.dot, q);
        st.residuals.push_back(res);
        iterates.push_back(q);
        images.push_back(s.dot);
        inside.push_back(gamma_check(sp, q, p.gamma_C).ok());
        st.iterations = it;
        st.residual = res;
        if (res <= p.tol) {
            st.converged = true;
            // polish towards the floating-point floor; identities scale the residual by d
            DotMeasure best = q;
            StepResult best_step = s;
            long double best_res = res;
            for (int extra = 0, stall = 0; extra < p.polish_iter && stall < 3; ++extra) {
                q = s.dot;
                s = bp_step(sp, q, p.lambda);
                res = l1_distance(s.dot, q);
                if (res < best_res) {
                    stall = res < best_res * 0.9L ? 0 : stall + 1;
                    best = q;
                    best_step = s;
                    best_res = res;
                } else {
                    ++stall;
                }
            }
            // contraction towards the fixed point along the trajectory
            for (size_t i = 0; i < iterates.size(); ++i) {
                long double den = l1_distance(iterates[i], best);
                if (den < 1e-9L) break;
                st.contraction.push_back(l1_distance(images[i], best) / den);
                st.contraction_in_gamma.push_back(inside[i]);
            }
            st.residual = best_res;
            st.qdot = best;
            st.qhat = best_step.hat;
            st.log_Zhat = best_step.log_Zhat;
            st.log_Zdot = best_step.log_Zdot;
            st.gamma = gamma_check(sp, best, p.gamma_C);
            return st;
        }
        q = damp(s.dot, q);
    }
    std::ostringstream os;
    os << "no convergence within " << p.max_iter << " iterations; residual trace:";
    for (size_t i = 0; i < st.residuals.size(); i += std::max<size_t>(1, st.residuals.size() / 10))
        os << " " << static_cast<double>(st.residuals[i]);
    os << " " << static_cast<double>(st.residual);
    throw ValidationError(os.str());
}

OptimalProfile optimal_profiles(const BpSpace& sp, const BpState& st, const TreeCatalog& cat, SpinTable& tab) {
    if (!st.converged) throw InputError("optimal profiles need a converged state");
    if (cat.d != sp.d || cat.k != sp.k || cat.L < sp.L) throw InputError("catalog does not cover the truncation");
    for (int v = 1; v <= sp.L; ++v)
        if (!cat.complete[v]) throw CapacityError("catalog incomplete at v = " + std::to_string(v));
    const int d = sp.d, k = sp.k, L = sp.L;
    const long double lambda = st.params.lambda;
    const DotMeasure& q = st.qdot;
    const HatMeasure& qh = st.qhat;
    const long double r = q.r, b = q.b, f = q.free_mass();
    const long double alpha = static_cast<long double>(d) / k;

    OptimalProfile P;
    P.lambda = lambda;
    P.d = d;
    P.k = k;
    P.L = L;

    // edge normalizer: frozen, S and join-join parts
    auto pair_weight = [&](size_t i, size_t j) {
        long double inv_phibar = sp.dots[i].m0 * sp.hats[j].m0 + sp.dots[i].m1 * sp.hats[j].m1;
        return powl(inv_phibar, lambda);
    };
    long double zbar_s = powl(2.0L, -lambda) * f * qh.s;
    long double zbar_free = zbar_s;
    for (size_t i = 0; i < sp.dots.size(); ++i)
        for (size_t j = 0; j < sp.hats.size(); ++j)
            if (sp.dots[i].v + sp.hats[j].v - 1 <= L) zbar_free += pair_weight(i, j) * q.free[i] * qh.join[j];
    long double zbar_frozen = 2 * r * qh.r + 2 * b * qh.b;
    long double zbar = zbar_frozen + zbar_free;
    long double zbar_internal = zbar_free - zbar_s;
    P.z.log_zbar = logl(zbar);
    P.z.log_zdot = st.log_Zdot + P.z.log_zbar;
    P.z.log_zhat = st.log_Zhat + P.z.log_zbar;

    // variable normalizer by direct sums over d-tuples
    long double lrb = logl(qh.r + qh.b);
    long double l_frozen_dot = kLog2 + d * lrb + log1pl(-expl(d * (logl(qh.b) - lrb)));
    std::vector<long double> free_dot;
    long double ls = safe_log(qh.s);
    for (auto& t : sp.hat_tuples) {
        int ns = d - t.size;
        long double lphi = log_sum_exp({t.log_m0 - ns * kLog2, t.log_m1 - ns * kLog2});
        free_dot.push_back(lambda * lphi + log_multinomial(d, t.items, ns) + log_measure_prod(t.items, qh.join) +
                           (ns ? ns * ls : 0));
    }
    long double l_free_dot = log_sum_exp(free_dot);
    P.z.log_zdot_direct = log_sum_exp({l_frozen_dot, l_free_dot});

    // clause normalizer: boundary types by literal averages, then free-tree clauses
    long double hat_frozen = 0;
    for (int nr = 0; nr <= k; ++nr)
        for (int nb = 0; nr + nb <= k; ++nb) {
            int ns = k - nr - nb;
            long double vh = to_ld(vhat_counts(k, nr, nb, ns));
            if (vh <= 0) continue;
            OptimalProfile::HatType ht;
            ht.r = nr;
            ht.b = nb;
            ht.s = ns;
            ht.vhat = vh;
            ht.log_count = lgammal(k + 1.0L) - lgammal(nr + 1.0L) - lgammal(nb + 1.0L) - lgammal(ns + 1.0L) +
                           (nr + nb) * kLog2;
            ht.log_value = logl(vh) + nr * safe_log(r) + nb * safe_log(b) + ns * safe_log(f);
            hat_frozen += expl(ht.log_count + ht.log_value);
            P.bhat.push_back(ht);
        }
    long double hat_tree = 0;
    for (auto& t : sp.tuples) {
        long double lw = t.log_orderings + log_measure_prod(t.items, q.free);
        if (t.size < k) {
            hat_tree += 2 * expl(log_binom(k, t.size) + lw) * ipow(b, k - t.size) * powl(-expm1l(t.log_m0), lambda);
        } else {
            long double phi = 1 - expl(t.log_m0) - expl(t.log_m1);
            hat_tree += expl(lw) * powl(phi, lambda);
        }
    }
    long double zhat = hat_frozen + hat_tree;
    P.z.log_zhat_direct = logl(zhat);

    // boundary profile against the direct normalizers
    long double lzd = P.z.log_zdot_direct;
    P.bdot_log.assign(d + 1, kNegInf);
    for (int j = 1; j <= d; ++j) P.bdot_log[j] = j * safe_log(qh.r) + (d - j) * safe_log(qh.b) - lzd;
    P.bdot_mass = expl(l_frozen_dot - lzd);
    long double lzh = P.z.log_zhat_direct;
    for (auto& ht : P.bhat) {
        ht.log_value -= lzh;
        long double mass = expl(ht.log_count + ht.log_value);
        P.bhat_mass += mass;
        P.bhat_b0 += mass * ht.b / 2;
    }
    P.bbar = {r * qh.r / zbar, r * qh.r / zbar, b * qh.b / zbar, b * qh.b / zbar, zbar_s / zbar};
    P.h[1] = P.h[2] = d * (P.bbar[2] - P.bhat_b0 / k);
    P.h[3] = d * P.bbar[4];
    // free variables + free clauses - internal edges, each from its own part of the normalizer
    P.h[0] = expl(l_free_dot - lzd) + alpha * hat_tree / zhat - d * zbar_internal / zbar;

    // optimal free tree profile
    long double lb = safe_log(b), lS = ls - lambda * kLog2;
    P.p_tree.assign(cat.trees.size(), 0);
    P.log_p_tree.assign(cat.trees.size(), kNegInf);
    std::vector<long double> edge_count(sp.dots.size(), 0);
    bool unknown_spin = false;
    for (size_t i = 0; i < cat.trees.size(); ++i) {
        const FreeTree& t = cat.trees[i];
        if (t.v > L) continue;
        long double lp = log_of(t.J) + lambda * log_of(t.w_lit) + log_of(t.vhat_prod) + (t.eta_b0 + t.eta_b1) * lb +
                         t.eta_s * lS - P.z.log_zbar - t.v * st.log_Zdot - t.f * st.log_Zhat;
        long double p = expl(lp);
        P.log_p_tree[i] = lp;
        P.p_tree[i] = p;
        P.h_trees[0] += p;
        P.h_trees[1] += p * t.eta_b0;
        P.h_trees[2] += p * t.eta_b1;
        P.h_trees[3] += p * t.eta_s;
        P.s_star += p * log_of(t.w_lit);
        for (int e = 0; e < t.e(); ++e) {
            int x = sp.dot_index(t.dot[e]);
            if (x < 0) unknown_spin = true;
            else edge_count[x] += p;
        }
        for (int u = 0; u < t.v; ++u) {
            if (!t.s_count[u]) continue;
            int x = sp.dot_index(t.s_dot[u]);
            if (x < 0) unknown_spin = true;
            else edge_count[x] += p * t.s_count[u];
        }
    }
    (void)tab;

    // free dotted marginal of Hbar per flip orbit against the tree edge counts
    P.hdot_max_err = unknown_spin ? std::numeric_limits<long double>::infinity() : 0;
    std::vector<long double> hdot(sp.dots.size(), 0);
    for (size_t i = 0; i < sp.dots.size(); ++i) {
        long double s = powl(2.0L, -lambda) * qh.s;
        for (size_t j = 0; j < sp.hats.size(); ++j)
            if (sp.dots[i].v + sp.hats[j].v - 1 <= L) s += pair_weight(i, j) * qh.join[j];
        hdot[i] = q.free[i] * s / zbar;
    }
    for (size_t i = 0; i < sp.dots.size(); ++i) {
        size_t j = static_cast<size_t>(sp.dots[i].flip);
        long double a = hdot[i] + (j != i ? hdot[j] : 0);
        long double c = (edge_count[i] + (j != i ? edge_count[j] : 0)) / d;
        P.hdot_max_err = std::max(P.hdot_max_err, fabsl(a - c) / std::max(a, std::numeric_limits<long double>::min()));
    }
    // R and B marginals of Hhat against the boundary edge profile
    long double Zh = expl(st.log_Zhat);
    long double hr_unnorm = qh.r * Zh, hb_unnorm = qh.b * Zh;
    long double e1 = fabsl(r * hr_unnorm / zhat - P.bbar[0]) / P.bbar[0];
    long double e2 = fabsl(b * hb_unnorm / zhat - P.bbar[2]) / P.bbar[2];
    P.hdot_rb_err = std::max(e1, e2);
    return P;
}

long double psi_at(const TreeCatalog& cat, int L, long double lambda, const std::array<long double, 5>& th) {
    long double s = 0;
    for (auto& t : cat.trees) {
        if (t.v > L) continue;
        long double sl = log_of(t.w_lit);
        s += expl(log_of(t.J) + lambda * sl + log_of(t.vhat_prod) + th[0] + th[1] * t.eta_b0 + th[2] * t.eta_b1 +
                  th[3] * t.eta_s + th[4] * sl);
    }
    return s;
}

ThetaPsi theta_and_psi(const BpState& st, const OptimalProfile& P, const TreeCatalog& cat, long double h) {
    ThetaPsi T;
    const long double d = P.d, k = P.k, lambda = P.lambda;
    const long double D = k * d - k - d;
    const long double lZd = st.log_Zdot, lZh = st.log_Zhat;
    T.theta[0] = (k / D) * lZd + (d / D) * lZh - P.z.log_zbar;
    T.theta[1] = T.theta[2] = logl(st.qdot.b) - lZd / D - ((d - 1) / D) * lZh;
    T.theta[3] = logl(st.qhat.s) - lambda * kLog2 - ((k - 1) / D) * lZd - lZh / D;
    T.theta[4] = 0;

    for (size_t i = 0; i < cat.trees.size(); ++i) {
        const FreeTree& t = cat.trees[i];
        if (t.v > P.L) continue;
        long double sl = log_of(t.w_lit);
        long double lhs = log_of(t.J) + lambda * sl + log_of(t.vhat_prod) + T.theta[0] + T.theta[1] * t.eta_b0 +
                          T.theta[2] * t.eta_b1 + T.theta[3] * t.eta_s;
        T.max_identity_err = std::max(T.max_identity_err, fabsl(expm1l(lhs - P.log_p_tree[i])));
        long double p = expl(lhs);
        T.psi += p;
        T.grad[0] += p;
        T.grad[1] += p * t.eta_b0;
        T.grad[2] += p * t.eta_b1;
        T.grad[3] += p * t.eta_s;
        T.grad[4] += p * sl;
    }
    std::array<long double, 5> target = {P.h[0], P.h[1], P.h[2], P.h[3], P.s_star};
    for (int x = 0; x < 5; ++x) {
        T.max_grad_err = std::max(T.max_grad_err, fabsl(T.grad[x] - target[x]) / std::max(fabsl(target[x]), P.h[0]));
        // five-point central stencil
        auto at = [&](long double delta) {
            auto th = T.theta;
            th[x] += delta;
            return psi_at(cat, P.L, lambda, th);
        };
        T.grad_fd[x] = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
        T.max_fd_err = std::max(T.max_fd_err, fabsl(T.grad_fd[x] - T.grad[x]) / std::max(fabsl(T.grad[x]), P.h[0]));
    }
    return T;
}

long double f_rs(int d, int k) {
    return kLog2 + static_cast<long double>(d) / k * log1pl(-ldexpl(1.0L, 1 - k));
}

FreeEnergy free_energy(const BpState& st, const OptimalProfile& P, const ThetaPsi& th) {
    (void)st;
    FreeEnergy E;
    const int d = P.d, k = P.k;
    const long double alpha = static_cast<long double>(d) / k;
    E.F = P.z.log_zdot_direct + alpha * P.z.log_zhat_direct - d * P.z.log_zbar;

    long double psi = 0;
    for (int j = 1; j <= d; ++j) {
        long double lx = P.bdot_log[j];
        if (lx == kNegInf) continue;
        psi -= 2 * expl(log_binom(d, j) + lx) * lx;
    }
    for (auto& ht : P.bhat) psi += alpha * expl(ht.log_count + ht.log_value) * (logl(ht.vhat) - ht.log_value);
    for (auto x : P.bbar)
        if (x > 0) psi += d * x * logl(x);
    E.psi_circ = psi;
    E.F_psi = psi - (th.theta[0] * P.h[0] + th.theta[1] * P.h[1] + th.theta[2] * P.h[2] + th.theta[3] * P.h[3]);
    E.f_rs = f_rs(d, k);
    E.above_rs = E.F > E.f_rs + 1e-9L;
    return E;
}

BpPoint solve_point(const BpSpace& sp, const TreeCatalog& cat, SpinTable& tab, BpParams p) {
    BpPoint pt;
    pt.state = solve_fixed_point(sp, p);
    pt.profile = optimal_profiles(sp, pt.state, cat, tab);
    pt.theta = theta_and_psi(pt.state, pt.profile, cat);
    pt.energy = free_energy(pt.state, pt.profile, pt.theta);
    return pt;
}

bool BpAudit::ok() const {
    return residual && bands && gamma && contraction && normalizers && compat && hdot && theta && grad && grad_fd &&
           decay && energy && below_rs;
}

std::string BpAudit::failures() const {
    std::string out;
    auto add = [&](bool ok, const char* name) {
        if (!ok) out += std::string(out.empty() ? "" : ",") + name;
    };
    add(residual, "residual");
    add(bands, "bands");
    add(gamma, "gamma");
    add(contraction, "contraction");
    add(normalizers, "normalizers");
    add(compat, "compat");
    add(hdot, "hdot");
    add(theta, "theta");
    add(grad, "grad");
    add(grad_fd, "grad_fd");
    add(decay, "decay");
    add(energy, "energy");
    add(below_rs, "below_rs");
    return out;
}

BpAudit audit_point(const BpPoint& pt, const TreeCatalog& cat) {
    BpAudit a;
    const auto& st = pt.state;
    const auto& P = pt.profile;
    const int k = P.k;
    a.residual = st.converged && st.iterations <= st.params.max_iter && st.residual <= st.params.tol;
    long double band = 10 * ldexpl(1.0L, -k);
    a.bands = st.q_R() > 0.5L && st.q_R() <= 0.5L + band && st.q_B() >= 0.5L - band && st.q_B() < 0.5L &&
              st.q_f() <= band;
    a.gamma = st.gamma.ok();
    a.contraction = st.max_contraction_in_gamma() <= 0.5L;
    a.normalizer_err = std::max(fabsl(expm1l(P.z.log_zdot - P.z.log_zdot_direct)),
                                fabsl(expm1l(P.z.log_zhat - P.z.log_zhat_direct)));
    a.normalizers = a.normalizer_err <= 1e-8L;
    for (int x = 0; x < 4; ++x)
        a.compat_err = std::max(a.compat_err, fabsl(P.h_trees[x] - P.h[x]) / std::max(fabsl(P.h[x]), P.h[0]));
    a.compat = a.compat_err <= 1e-8L;
    a.hdot = P.hdot_max_err <= 1e-8L && P.hdot_rb_err <= 1e-8L;
    a.theta = pt.theta.max_identity_err <= 1e-8L;
    a.grad = pt.theta.max_grad_err <= 1e-6L;
    a.grad_fd = pt.theta.max_fd_err <= 1e-5L;
    a.decay = true;
    for (int v = 1; v <= P.L; ++v) {
        long double s = 0;
        for (size_t i = 0; i < cat.trees.size(); ++i)
            if (cat.trees[i].v == v) s += P.p_tree[i];
        if (s > powl(2.0L, -k * v / 2.0L)) a.decay = false;
    }
    a.energy_err = fabsl(pt.energy.F - pt.energy.F_psi);
    a.energy = a.energy_err <= 1e-8L;
    a.below_rs = !pt.energy.above_rs;
    return a;
}

LambdaStar lambda_star(const BpSpace& sp, const TreeCatalog& cat, SpinTable& tab, BpParams p, long double tol) {
    LambdaStar out;
    auto g = [&](long double lam, long double* s_out) {
        p.lambda = lam;
        BpPoint pt = solve_point(sp, cat, tab, p);
        long double v = pt.energy.F - lam * pt.profile.s_star;
        out.path.emplace_back(lam, v);
        ++out.evaluations;
        if (s_out) *s_out = pt.profile.s_star;
        return v;
    };
    long double s0 = 0, s1 = 0;
    long double g0 = g(0, &s0), g1 = g(1, &s1);
    if (g1 >= 0) {
        out.flag = "no_crossing_positive";
        out.lambda_star = 1;
        out.s_star = s1;
    } else if (g0 < 0) {
        out.flag = "no_crossing_negative";
        out.lambda_star = std::numeric_limits<long double>::quiet_NaN();
        out.s_star = std::numeric_limits<long double>::quiet_NaN();
    } else {
        out.flag = "crossing";
        long double lo = 0, hi = 1, s_lo = s0;
        while (hi - lo > tol) {
            long double mid = (lo + hi) / 2, s_mid = 0;
            if (g(mid, &s_mid) >= 0) {
                lo = mid;
                s_lo = s_mid;
            } else {
                hi = mid;
            }
        }
        out.lambda_star = lo;
        out.s_star = s_lo;
    }
    out.c_star = 1 / (2 * out.lambda_star);
    auto path = out.path;
    std::sort(path.begin(), path.end());
    for (size_t i = 1; i < path.size(); ++i)
        if (path[i].second > path[i - 1].second) out.monotone = false;
    return out;
}

long double decay_tail(int k, int L) {
    long double x = powl(2.0L, -k / 2.0L);
    return powl(x, L + 1) * ((L + 1) - L * x) / ((1 - x) * (1 - x));
}

PStar p_star(const OptimalProfile& P, const TreeCatalog& cat) {
    PStar ps;
    long double ham = 0, vsum = 0, ov = 0;
    for (size_t i = 0; i < cat.trees.size(); ++i) {
        const FreeTree& t = cat.trees[i];
        if (t.v > P.L) continue;
        ham += to_ld(t.ham) * P.p_tree[i];
        vsum += t.v * P.p_tree[i];
        ov += to_ld(t.overlap) * P.p_tree[i];
    }
    ps.p_star = 1 - 2 * ham;
    ps.p_star_alt = 1 - vsum + ov;
    ps.tail_bound = decay_tail(P.k, P.L);
    ps.in_range = ps.p_star >= 0 && ps.p_star <= 1;
    return ps;
}

std::string sweep_csv_header() {
    return "k,d,lambda,L,residual,iterations,q_R,q_B,q_f,Zdot,Zhat,Zbar,F,f_rs,s_star,lambda_star_flag\n";
}

std::string sweep_csv_row(const BpPoint& pt, const std::string& flag) {
    std::ostringstream os;
    os << std::setprecision(17);
    const auto& s = pt.state;
    auto D = [](long double x) { return static_cast<double>(x); };
    os << s.params.k << ',' << s.params.d << ',' << D(s.params.lambda) << ',' << s.params.L << ',' << D(s.residual)
       << ',' << s.iterations << ',' << D(s.q_R()) << ',' << D(s.q_B()) << ',' << D(s.q_f()) << ','
       << D(s.log_Zdot) << ',' << D(s.log_Zhat) << ',' << D(pt.profile.z.log_zbar) << ',' << D(pt.energy.F) << ','
       << D(pt.energy.f_rs) << ',' << D(pt.profile.s_star) << ',' << flag << '\n';
    return os.str();
}

std::string constants_json(const LambdaStar& ls, const PStar& ps, int L) {
    nlohmann::ordered_json j;
    auto num = [](long double x) -> nlohmann::ordered_json {
        if (std::isnan(x)) return nullptr;
        return static_cast<double>(x);
    };
    j["lambda_star"] = num(ls.lambda_star);
    j["s_star"] = num(ls.s_star);
    j["c_star"] = num(ls.c_star);
    j["p_star"] = num(ps.p_star);
    j["L"] = L;
    j["tail_bound"] = num(ps.tail_bound);
    j["flag"] = ls.flag;
    return j.dump();
}

int band_degree(int k) {
    long double lo = (ldexpl(1.0L, k - 1) - 2) * kLog2, hi = ldexpl(1.0L, k - 1) * kLog2;
    return static_cast<int>(lroundl(k * (lo + hi) / 2));
}

}  // namespace naesat
