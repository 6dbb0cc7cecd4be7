#pragma once
#include <gmpxx.h>

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace naesat {

enum class SpinKind : uint8_t { D0, D1, DStar, DJoin, H0, H1, HS, HStar, HJoin };

// children of a join as (spin id, multiplicity), sorted by child key
using Multiset = std::vector<std::pair<int, int>>;

struct SpinRec {
    SpinKind kind;
    Multiset children;
    int flip = -1;
    int v = 0;          // number of free variables encoded
    bool star = false;  // contains a star somewhere
    mpq_class m0, m1;   // dotted or hatted message evaluated at 0 and 1
    mpq_class z;        // normalizer of the message
    long double logz = 0;
    std::string key;
};

// Interned message spins for fixed (d, k): dotted spins D0, D1, star and joins of d-1 hatted spins;
// hatted spins H0, H1, S, star and joins of k-1 literal-adjusted dotted spins.
class SpinTable {
public:
    SpinTable(int d, int k);

    int d() const { return d_; }
    int k() const { return k_; }
    int size() const { return static_cast<int>(recs_.size()); }
    const SpinRec& operator[](int id) const { return recs_[id]; }

    int d0() const { return d0_; }
    int d1() const { return d1_; }
    int dstar() const { return dstar_; }
    int h0() const { return h0_; }
    int h1() const { return h1_; }
    int hs() const { return hs_; }
    int hstar() const { return hstar_; }

    bool is_dot(int id) const;
    bool is_join(int id) const;
    int flip(int id) const { return recs_[id].flip; }
    int literal_flip(int id, int lit) const { return lit ? recs_[id].flip : id; }

    // joins from multisets of children; arity must be d-1 (dotted) or k-1 (hatted)
    int dot_join(Multiset children);
    int hat_join(Multiset children);

    // local maps; dot_map returns -1 for the error symbol (both 0 and 1 among the inputs)
    static constexpr int kError = -1;
    int dot_map(const std::vector<int>& hats);
    int hat_map(const std::vector<int>& dots);
    int dot_map(const Multiset& hats);
    int hat_map(const Multiset& dots);

    int find(const std::string& key) const;

private:
    int intern(SpinRec rec);
    Multiset normalize(Multiset ms) const;
    int flip_join(int id);

    int d_, k_;
    std::vector<SpinRec> recs_;
    std::unordered_map<std::string, int> index_;
    int d0_, d1_, dstar_, h0_, h1_, hs_, hstar_;
};

Multiset to_multiset(const std::vector<int>& ids);
mpq_class mpq_pow(const mpq_class& q, unsigned long e);

}  // namespace naesat
