#include "naesat/firstmoment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "naesat/coloring.hpp"
#include "naesat/errors.hpp"
#include "naesat/exact.hpp"
#include "naesat/oracle.hpp"
#include "naesat/parallel.hpp"

namespace naesat {

std::string BoundaryProfile::key() const {
    std::ostringstream os;
    os << "D";
    for (auto& [t, c] : Bdot) os << ' ' << t << ':' << c;
    os << "|H";
    for (auto& [t, c] : Bhat) os << ' ' << t << ':' << c;
    os << "|E";
    for (int c : Bbar) os << ' ' << c;
    os << "|h";
    for (int c : h) os << ' ' << c;
    return os.str();
}

std::string FirstMomentProfile::key() const {
    std::string s = B.key() + "|C";
    for (auto& [t, c] : n_f) s += " " + t + ":" + std::to_string(c);
    return s;
}

FirstMomentProfile profile_of(const Instance& inst, const FrozenConfig& fc) {
    FirstMomentProfile p;
    Profile cp = component_profile(inst, fc);
    p.B.n = inst.n();
    p.B.d = inst.d();
    p.B.k = inst.k();
    p.B.m = inst.m();
    p.B.Bdot = cp.Bdot;
    p.B.Bhat = cp.Bhat;
    p.B.Bbar = cp.Bbar;
    p.B.h = cp.h;
    FreeStructure fs = free_structure(inst, fc);
    for (auto& piece : fs.pieces) {
        PieceClass pc = piece_class(inst, fc, piece);
        p.n_f[pc.key]++;
        if (p.info.count(pc.key)) continue;
        ComponentInfo ci;
        ci.v = pc.v;
        ci.f = pc.f;
        ci.e = pc.e;
        ci.eta_b0 = pc.eta_b0;
        ci.eta_b1 = pc.eta_b1;
        ci.eta_s = pc.eta_s;
        ci.aut = pc.aut;
        ci.w_lit = piece_extensions(inst, fc, piece);
        p.info[pc.key] = ci;
    }
    return p;
}

Compatibility check_compatibility(const FirstMomentProfile& p) {
    const auto& B = p.B;
    std::array<long, 5> var_side{}, clause_side{};
    long frozen = 0, sep = 0;
    for (auto& [t, c] : B.Bdot) {
        frozen += c;
        for (char ch : t) var_side[ch - '0'] += c;
    }
    for (auto& [t, c] : B.Bhat) {
        sep += c;
        for (char ch : t) clause_side[ch - '0'] += c;
    }
    var_side[S] += B.h[3];
    clause_side[B0] += B.h[1];
    clause_side[B1] += B.h[2];
    for (int x = 0; x < 5; ++x) {
        if (var_side[x] != B.Bbar[x] || clause_side[x] != B.Bbar[x])
            return {false, "compatibility fails at color " + color_name(static_cast<uint8_t>(x))};
    }
    std::array<int, 4> h{};
    bool cyclic = false;
    for (auto& [key, c] : p.n_f) {
        const auto& ci = p.info.at(key);
        h[0] += c;
        h[1] += c * ci.eta_b0;
        h[2] += c * ci.eta_b1;
        h[3] += c * ci.eta_s;
        cyclic |= ci.cyclic();
    }
    if (h != B.h) return {false, "component profile disagrees with h"};
    if (!cyclic) {
        long bnd = std::accumulate(B.Bbar.begin(), B.Bbar.end(), 0L);
        long euler = (B.n - frozen) + (B.m - sep) - (static_cast<long>(B.n) * B.d - bnd);
        if (euler != B.h[0]) return {false, "Euler count of free trees disagrees with h"};
    }
    return {true, ""};
}

namespace {

mpq_class vhat_of(const std::string& t) {
    std::vector<uint8_t> tuple;
    for (char ch : t) tuple.push_back(static_cast<uint8_t>(ch - '0'));
    return vhat_closed(tuple);
}

long double lfact(long n) { return lgammal(static_cast<long double>(n) + 1); }

}  // namespace

mpq_class expected_Z_restricted_exact(const FirstMomentProfile& p, int lambda) {
    if (lambda != 0 && lambda != 1) throw ConfigError("exact restricted formula needs lambda in {0,1}");
    auto compat = check_compatibility(p);
    if (!compat.ok) throw InputError("incompatible profile: " + compat.diagnostic);
    const auto& B = p.B;
    mpq_class r(factorial(B.n) * factorial(B.m), factorial(static_cast<unsigned long>(B.n) * B.d));
    for (int c : B.Bbar) r *= factorial(c);
    for (auto& [t, c] : B.Bdot) r /= factorial(c);
    for (auto& [t, c] : B.Bhat) {
        r /= factorial(c);
        r *= mpq_pow(vhat_of(t), c);
    }
    for (auto& [key, c] : p.n_f) {
        const auto& ci = p.info.at(key);
        mpz_class num = 1;
        for (int i = 0; i < ci.v; ++i) num *= factorial(B.d);
        for (int i = 0; i < ci.f; ++i) num *= factorial(B.k);
        if (lambda == 1) num *= ci.w_lit;
        mpq_class cf(num, ci.aut * (mpz_class(1) << (B.k * ci.f)));
        cf.canonicalize();
        r *= mpq_pow(cf, c);
        r /= factorial(c);
    }
    r.canonicalize();
    return r;
}

long double log_expected_Z_restricted(const FirstMomentProfile& p, long double lambda) {
    auto compat = check_compatibility(p);
    if (!compat.ok) throw InputError("incompatible profile: " + compat.diagnostic);
    const auto& B = p.B;
    long double r = lfact(B.n) + lfact(B.m) - lfact(static_cast<long>(B.n) * B.d);
    for (int c : B.Bbar) r += lfact(c);
    for (auto& [t, c] : B.Bdot) r -= lfact(c);
    for (auto& [t, c] : B.Bhat) {
        mpq_class v = vhat_of(t);
        if (v == 0) return -INFINITY;
        r += c * log_of(v) - lfact(c);
    }
    for (auto& [key, c] : p.n_f) {
        const auto& ci = p.info.at(key);
        if (ci.w_lit == 0) return -INFINITY;
        long double lc = ci.v * lfact(B.d) + ci.f * lfact(B.k) + lambda * log_of(ci.w_lit) - log_of(ci.aut) -
                         B.k * ci.f * logl(2.0L);
        r += c * lc - lfact(c);
    }
    return r;
}

long double expected_Z_restricted(const FirstMomentProfile& p, long double lambda) {
    return expl(log_expected_Z_restricted(p, lambda));
}

RestrictedOracle restricted_oracle(int n, int d, int k, const std::vector<long double>& lambdas) {
    int nd = n * d;
    if (nd % k) throw ConfigError("nd not divisible by k");
    if (nd > 8) throw CapacityError("restricted oracle enumerates (nd)! 2^nd instances; needs nd <= 8");
    std::vector<std::vector<int>> perms;
    std::vector<int> perm(nd);
    std::iota(perm.begin(), perm.end(), 0);
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
    size_t L = lambdas.size();
    auto is_exact = [&](size_t j) { return lambdas[j] == 0.0L || lambdas[j] == 1.0L; };

    struct Acc {
        FirstMomentProfile profile;
        std::vector<mpz_class> exact;
        std::vector<long double> value;
    };
    std::vector<std::map<std::string, Acc>> local(perms.size());
    parallel_chunks(perms.size(), [&](size_t c) {
        auto& out = local[c];
        for (uint64_t lit = 0; lit < (uint64_t{1} << nd); ++lit) {
            std::vector<uint8_t> lits(nd);
            for (int i = 0; i < nd; ++i) lits[i] = (lit >> i) & 1;
            Instance inst(n, d, k, perms[c], lits);
            std::map<FrozenConfig, long> groups;
            for (auto& x : enumerate_solutions(inst)) groups[coarsen_edges(inst, x)]++;
            for (auto& [fc, size] : groups) {
                if (!validate_frozen(inst, fc).ok) throw ValidationError("coarsening produced an invalid configuration");
                FirstMomentProfile p = profile_of(inst, fc);
                std::string key = p.key();
                auto it = out.find(key);
                if (it == out.end()) {
                    it = out.emplace(key, Acc{p, std::vector<mpz_class>(L, 0), std::vector<long double>(L, 0)}).first;
                }
                for (size_t j = 0; j < L; ++j) {
                    if (is_exact(j)) it->second.exact[j] += lambdas[j] == 0.0L ? 1 : size;
                    it->second.value[j] += powl(static_cast<long double>(size), lambdas[j]);
                }
            }
        }
    });
    RestrictedOracle o;
    o.n = n;
    o.d = d;
    o.k = k;
    o.lambdas = lambdas;
    o.instances = factorial(nd) * (mpz_class(1) << nd);
    std::map<std::string, Acc> merged;
    for (auto& part : local)
        for (auto& [key, acc] : part) {
            auto it = merged.find(key);
            if (it == merged.end()) {
                merged.emplace(key, acc);
                continue;
            }
            for (size_t j = 0; j < L; ++j) {
                it->second.exact[j] += acc.exact[j];
                it->second.value[j] += acc.value[j];
            }
        }
    o.total_exact.assign(L, 0);
    o.total.assign(L, 0);
    long double inst_ld = to_ld(mpq_class(o.instances));
    for (auto& [key, acc] : merged) {
        RestrictedEntry e{acc.profile, std::vector<mpq_class>(L, 0), std::vector<long double>(L, 0)};
        for (size_t j = 0; j < L; ++j) {
            if (is_exact(j)) {
                e.exact[j] = mpq_class(acc.exact[j], o.instances);
                e.exact[j].canonicalize();
                o.total_exact[j] += e.exact[j];
            }
            e.value[j] = acc.value[j] / inst_ld;
            o.total[j] += e.value[j];
        }
        o.entries.emplace(key, std::move(e));
    }
    return o;
}

PsiCirc psi_circ(const BoundaryProfile& B) {
    PsiCirc out;
    long double n = B.n, m = B.m, nd = static_cast<long double>(B.n) * B.d;
    long double d = B.d, k = B.k;
    long double kappa = 1;
    long double prod_num = 0, prod_den = 0;  // logs
    int sd = 0, sh = 0, sb = 0;
    for (auto& [t, c] : B.Bdot) {
        if (!c) continue;
        long double x = c / n;
        out.psi -= x * logl(x);
        prod_num += logl(x);
        kappa = std::min(kappa, x);
        ++sd;
    }
    for (auto& [t, c] : B.Bhat) {
        if (!c) continue;
        long double x = c / m;
        long double v = to_ld(vhat_of(t));
        out.psi += d / k * x * (logl(v) - logl(x));
        prod_num += logl(x);
        kappa = std::min(kappa, x);
        ++sh;
    }
    for (int c : B.Bbar) {
        if (!c) continue;
        long double x = c / nd;
        out.psi += d * x * logl(x);
        prod_den += logl(x);
        kappa = std::min(kappa, x);
        ++sb;
    }
    int phi1 = sd + sh - sb - 1, phi2 = sh - sb, phi3 = 1 - sh;
    out.log_p = 0.5L * (prod_num - prod_den) + 0.5L * phi1 * logl(2 * M_PIl * n) + 0.5L * phi2 * logl(d) +
                0.5L * phi3 * logl(k);
    out.kappa = kappa;
    long double ex = lfact(B.n) + lfact(B.m) - lfact(static_cast<long>(B.n) * B.d);
    for (int c : B.Bbar) ex += lfact(c);
    for (auto& [t, c] : B.Bdot) ex -= lfact(c);
    for (auto& [t, c] : B.Bhat) ex += c * logl(to_ld(vhat_of(t))) - lfact(c);
    out.log_exact = ex;
    return out;
}

std::vector<MomentReport> verify_first_moment(const RestrictedOracle& o, long double tol) {
    std::vector<MomentReport> reps;
    for (size_t j = 0; j < o.lambdas.size(); ++j) {
        MomentReport r;
        r.lambda = o.lambdas[j];
        r.exact = r.lambda == 0.0L || r.lambda == 1.0L;
        r.formula_total_exact = 0;
        for (auto& [key, e] : o.entries) {
            ++r.profiles_checked;
            long double f = expected_Z_restricted(e.profile, r.lambda);
            r.formula_total += f;
            long double err = fabsl(f - e.value[j]) / std::max(fabsl(e.value[j]), 1e-300L);
            r.max_rel_err = std::max(r.max_rel_err, err);
            if (r.exact) {
                mpq_class fx = expected_Z_restricted_exact(e.profile, static_cast<int>(r.lambda));
                r.formula_total_exact += fx;
                r.exact_matches += fx == e.exact[j];
            } else {
                r.exact_matches += err <= tol;
            }
        }
        r.oracle_total = o.total[j];
        if (r.exact) r.oracle_total_exact = o.total_exact[j];
        r.ok = r.exact ? (r.exact_matches == r.profiles_checked && r.formula_total_exact == r.oracle_total_exact)
                       : (r.exact_matches == r.profiles_checked &&
                          fabsl(r.formula_total - r.oracle_total) <= tol * fabsl(r.oracle_total));
        reps.push_back(r);
    }
    return reps;
}

std::string moment_report_json(const RestrictedOracle& o, const std::vector<MomentReport>& reports) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (auto& r : reports) {
        nlohmann::ordered_json j;
        j["n"] = o.n;
        j["d"] = o.d;
        j["k"] = o.k;
        j["lambda"] = static_cast<double>(r.lambda);
        j["profiles_checked"] = r.profiles_checked;
        j["exact_matches"] = r.exact_matches;
        j["max_rel_err"] = static_cast<double>(r.max_rel_err);
        if (r.exact) {
            j["formula_total"] = to_string(r.formula_total_exact);
            j["oracle_total"] = to_string(r.oracle_total_exact);
        } else {
            j["formula_total"] = static_cast<double>(r.formula_total);
            j["oracle_total"] = static_cast<double>(r.oracle_total);
        }
        j["ok"] = r.ok;
        out.push_back(j);
    }
    return out.dump(2);
}

}  // namespace naesat
