#include "naesat/spin.hpp"

#include <algorithm>
#include <map>

#include "naesat/errors.hpp"
#include "naesat/exact.hpp"

namespace naesat {

mpq_class mpq_pow(const mpq_class& q, unsigned long e) {
    mpz_class num, den;
    mpz_pow_ui(num.get_mpz_t(), q.get_num_mpz_t(), e);
    mpz_pow_ui(den.get_mpz_t(), q.get_den_mpz_t(), e);
    mpq_class r(num, den);
    r.canonicalize();
    return r;
}

Multiset to_multiset(const std::vector<int>& ids) {
    std::map<int, int> c;
    for (int i : ids) c[i]++;
    return Multiset(c.begin(), c.end());
}

namespace {

SpinRec leaf(SpinKind kind, const std::string& key, int v, mpq_class m0, mpq_class m1, mpq_class z) {
    SpinRec r;
    r.kind = kind;
    r.key = key;
    r.v = v;
    r.m0 = m0;
    r.m1 = m1;
    r.z = z;
    r.logz = log_of(z);
    r.star = kind == SpinKind::DStar || kind == SpinKind::HStar;
    return r;
}

}  // namespace

SpinTable::SpinTable(int d, int k) : d_(d), k_(k) {
    if (d < 1 || k < 2) throw ConfigError("spin table needs d >= 1 and k >= 2");
    mpq_class half(1, 2);
    d0_ = intern(leaf(SpinKind::D0, "0", 0, 1, 0, 1));
    d1_ = intern(leaf(SpinKind::D1, "1", 0, 0, 1, 1));
    dstar_ = intern(leaf(SpinKind::DStar, "*", 0, half, half, 1));
    h0_ = intern(leaf(SpinKind::H0, "h0", 0, 1, 0, 1));
    h1_ = intern(leaf(SpinKind::H1, "h1", 0, 0, 1, 1));
    hs_ = intern(leaf(SpinKind::HS, "S", 1, half, half, 2));
    hstar_ = intern(leaf(SpinKind::HStar, "h*", 0, half, half, 1));
    recs_[d0_].flip = d1_;
    recs_[d1_].flip = d0_;
    recs_[dstar_].flip = dstar_;
    recs_[h0_].flip = h1_;
    recs_[h1_].flip = h0_;
    recs_[hs_].flip = hs_;
    recs_[hstar_].flip = hstar_;
}

bool SpinTable::is_dot(int id) const {
    auto k = recs_[id].kind;
    return k == SpinKind::D0 || k == SpinKind::D1 || k == SpinKind::DStar || k == SpinKind::DJoin;
}

bool SpinTable::is_join(int id) const {
    auto k = recs_[id].kind;
    return k == SpinKind::DJoin || k == SpinKind::HJoin;
}

int SpinTable::find(const std::string& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? -1 : it->second;
}

int SpinTable::intern(SpinRec rec) {
    auto it = index_.find(rec.key);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(recs_.size());
    index_.emplace(rec.key, id);
    recs_.push_back(std::move(rec));
    return id;
}

Multiset SpinTable::normalize(Multiset ms) const {
    std::map<int, int> c;
    for (auto& [id, m] : ms)
        if (m > 0) c[id] += m;
    Multiset out(c.begin(), c.end());
    std::sort(out.begin(), out.end(), [&](auto& a, auto& b) { return recs_[a.first].key < recs_[b.first].key; });
    return out;
}

int SpinTable::dot_join(Multiset children) {
    children = normalize(std::move(children));
    int arity = 0;
    SpinRec r;
    r.kind = SpinKind::DJoin;
    r.v = 1;
    mpq_class p0 = 1, p1 = 1;
    std::string key = "D(";
    for (auto& [id, m] : children) {
        const SpinRec& c = recs_[id];
        if (is_dot(id) || c.kind == SpinKind::H0 || c.kind == SpinKind::H1)
            throw InputError("dotted join child must be S, star or a hatted join");
        arity += m;
        r.v += m * (c.v - 1);
        r.star = r.star || c.star;
        p0 *= mpq_pow(c.m0, m);
        p1 *= mpq_pow(c.m1, m);
        key += c.key;
        if (m > 1) key += "^" + std::to_string(m);
        key += ",";
    }
    if (arity != d_ - 1) throw InputError("dotted join arity must be d-1");
    key += ")";
    if (int f = find(key); f >= 0) return f;
    r.key = key;
    r.children = children;
    r.z = p0 + p1;
    r.m0 = p0 / r.z;
    r.m1 = p1 / r.z;
    r.logz = log_of(r.z);
    int id = intern(std::move(r));
    recs_[id].flip = flip_join(id);
    return id;
}

int SpinTable::hat_join(Multiset children) {
    children = normalize(std::move(children));
    int arity = 0;
    SpinRec r;
    r.kind = SpinKind::HJoin;
    r.v = 1;
    mpq_class q0 = 1, q1 = 1;
    std::string key = "H(";
    for (auto& [id, m] : children) {
        const SpinRec& c = recs_[id];
        if (!is_dot(id)) throw InputError("hatted join child must be dotted");
        arity += m;
        r.v += m * c.v;
        r.star = r.star || c.star;
        q0 *= mpq_pow(c.m0, m);
        q1 *= mpq_pow(c.m1, m);
        key += c.key;
        if (m > 1) key += "^" + std::to_string(m);
        key += ",";
    }
    if (arity != k_ - 1) throw InputError("hatted join arity must be k-1");
    key += ")";
    if (int f = find(key); f >= 0) return f;
    r.key = key;
    r.children = children;
    r.z = 2 - q0 - q1;
    if (r.z == 0) throw ValidationError("hatted join with zero normalizer");
    r.m0 = (1 - q0) / r.z;
    r.m1 = (1 - q1) / r.z;
    r.logz = log_of(r.z);
    int id = intern(std::move(r));
    recs_[id].flip = flip_join(id);
    return id;
}

int SpinTable::flip_join(int id) {
    Multiset fl;
    bool dot = recs_[id].kind == SpinKind::DJoin;
    Multiset ch = recs_[id].children;
    for (auto& [c, m] : ch) {
        int f = recs_[c].flip;
        if (f < 0) f = flip_join(c);
        fl.emplace_back(f, m);
    }
    // the flipped join may already exist (it is the join itself when symmetric)
    int fid = dot ? dot_join(fl) : hat_join(fl);
    recs_[fid].flip = id;
    return fid;
}

int SpinTable::dot_map(const Multiset& hats) {
    bool has0 = false, has1 = false, star = false;
    int arity = 0;
    for (auto& [id, m] : hats) {
        arity += m;
        auto kd = recs_[id].kind;
        has0 |= kd == SpinKind::H0;
        has1 |= kd == SpinKind::H1;
        star |= kd == SpinKind::HStar;
    }
    if (arity != d_ - 1) throw InputError("dot_map needs d-1 inputs");
    if (has0 && has1) return kError;
    if (has0) return d0_;
    if (has1) return d1_;
    if (star) return dstar_;
    return dot_join(hats);
}

int SpinTable::hat_map(const Multiset& dots) {
    int n0 = 0, n1 = 0, arity = 0;
    bool star = false;
    for (auto& [id, m] : dots) {
        arity += m;
        auto kd = recs_[id].kind;
        if (kd == SpinKind::D0) n0 += m;
        if (kd == SpinKind::D1) n1 += m;
        star |= kd == SpinKind::DStar;
    }
    if (arity != k_ - 1) throw InputError("hat_map needs k-1 inputs");
    if (n1 == k_ - 1) return h0_;
    if (n0 == k_ - 1) return h1_;
    if (n0 > 0 && n1 > 0) return hs_;
    if (star) return hstar_;
    return hat_join(dots);
}

int SpinTable::dot_map(const std::vector<int>& hats) { return dot_map(to_multiset(hats)); }
int SpinTable::hat_map(const std::vector<int>& dots) { return hat_map(to_multiset(dots)); }

}  // namespace naesat
