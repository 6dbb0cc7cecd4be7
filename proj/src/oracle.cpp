#include "naesat/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "naesat/errors.hpp"
#include "naesat/exact.hpp"
#include "naesat/frozen.hpp"
#include "naesat/parallel.hpp"
#include "naesat/rng.hpp"

namespace naesat {

uint64_t pack(const Assignment& x) {
    uint64_t m = 0;
    for (size_t v = 0; v < x.size(); ++v) m |= static_cast<uint64_t>(x[v] & 1) << v;
    return m;
}

Assignment unpack(uint64_t mask, int n) {
    Assignment x(n);
    for (int v = 0; v < n; ++v) x[v] = (mask >> v) & 1;
    return x;
}

namespace {

struct ClauseMasks {
    uint64_t pos, neg;  // variables appearing with literal 0 / 1
};

std::vector<ClauseMasks> clause_masks(const Instance& inst) {
    std::vector<ClauseMasks> out(inst.m(), {0, 0});
    for (int i = 0; i < inst.edges(); ++i) {
        auto& c = out[inst.clause_of(i)];
        (inst.literal(i) ? c.neg : c.pos) |= 1ULL << inst.var_of(i);
    }
    return out;
}

// adjusted value x_v ^ l: all zero iff pos-vars are 0 and neg-vars are 1
bool satisfied(const std::vector<ClauseMasks>& cm, uint64_t x) {
    for (auto& c : cm) {
        bool all0 = (x & c.pos) == 0 && (c.neg & ~x) == 0;
        bool all1 = (c.pos & ~x) == 0 && (x & c.neg) == 0;
        if (all0 || all1) return false;
    }
    return true;
}

// lexicographic order of (x_0..x_{n-1}) is numeric order of the bit-reversed mask
uint64_t reverse_bits(uint64_t m, int n) {
    uint64_t r = 0;
    for (int v = 0; v < n; ++v) r |= ((m >> v) & 1) << (n - 1 - v);
    return r;
}

}  // namespace

std::vector<uint64_t> solution_masks(const Instance& inst) {
    int n = inst.n();
    if (n > 32) throw CapacityError("enumeration needs n <= 32");
    auto cm = clause_masks(inst);
    uint64_t total = 1ULL << n;
    size_t chunks = n > 16 ? (1u << (n - 16)) : 1;
    uint64_t per = total / chunks;
    std::vector<std::vector<uint64_t>> parts(chunks);
    parallel_chunks(chunks, [&](size_t c) {
        for (uint64_t r = c * per; r < (c + 1) * per; ++r) {
            uint64_t x = reverse_bits(r, n);
            if (satisfied(cm, x)) parts[c].push_back(x);
        }
    });
    std::vector<uint64_t> out;
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::vector<Assignment> enumerate_solutions(const Instance& inst) {
    std::vector<Assignment> out;
    for (uint64_t m : solution_masks(inst)) out.push_back(unpack(m, inst.n()));
    return out;
}

namespace {

struct UnionFind {
    std::vector<size_t> p;
    explicit UnionFind(size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    size_t find(size_t x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    void unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) p[std::max(a, b)] = std::min(a, b);
    }
};

ClusterCensus census_from_roots(const std::vector<Assignment>& sols, const std::vector<size_t>& root) {
    ClusterCensus c;
    c.n = sols.empty() ? 0 : static_cast<int>(sols[0].size());
    c.Z = static_cast<unsigned long>(sols.size());
    std::unordered_map<size_t, size_t> idx;
    std::vector<size_t> order(sols.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return sols[a] < sols[b]; });
    for (size_t i : order) {
        auto [it, fresh] = idx.emplace(root[i], c.clusters.size());
        if (fresh) {
            c.clusters.emplace_back();
            c.clusters.back().representative = sols[i];
        }
        c.clusters[it->second].members.push_back(i);
    }
    for (auto& cl : c.clusters) cl.size = static_cast<unsigned long>(cl.members.size());
    return c;
}

}  // namespace

ClusterCensus cluster_census(const std::vector<Assignment>& sols, int merge_threshold) {
    size_t N = sols.size();
    int n = N ? static_cast<int>(sols[0].size()) : 0;
    std::vector<uint64_t> masks(N);
    std::unordered_map<uint64_t, size_t> where;
    for (size_t i = 0; i < N; ++i) {
        masks[i] = pack(sols[i]);
        where.emplace(masks[i], i);
    }
    UnionFind uf(N);
    for (size_t i = 0; i < N; ++i)
        for (int v = 0; v < n; ++v) {
            auto it = where.find(masks[i] ^ (1ULL << v));
            if (it != where.end()) uf.unite(i, it->second);
        }
    if (merge_threshold > 1) {
        bool merged = true;
        while (merged) {
            merged = false;
            for (size_t i = 0; i < N && !merged; ++i)
                for (size_t j = i + 1; j < N && !merged; ++j)
                    if (uf.find(i) != uf.find(j) && __builtin_popcountll(masks[i] ^ masks[j]) <= merge_threshold) {
                        uf.unite(i, j);
                        merged = true;
                    }
        }
    }
    std::vector<size_t> root(N);
    for (size_t i = 0; i < N; ++i) root[i] = uf.find(i);
    return census_from_roots(sols, root);
}

ClusterCensus cluster_census_bfs(const std::vector<Assignment>& sols) {
    size_t N = sols.size();
    const size_t none = static_cast<size_t>(-1);
    std::vector<size_t> root(N, none);
    for (size_t s = 0; s < N; ++s) {
        if (root[s] != none) continue;
        std::deque<size_t> q{s};
        root[s] = s;
        while (!q.empty()) {
            size_t i = q.front();
            q.pop_front();
            for (size_t j = 0; j < N; ++j) {
                if (root[j] != none) continue;
                int ham = 0;
                for (size_t v = 0; v < sols[i].size(); ++v) ham += sols[i][v] != sols[j][v];
                if (ham == 1) {
                    root[j] = s;
                    q.push_back(j);
                }
            }
        }
    }
    return census_from_roots(sols, root);
}

void attach_frozen(const Instance& inst, const std::vector<Assignment>& sols, ClusterCensus& census) {
    (void)sols;
    for (auto& cl : census.clusters) cl.frozen_digest = coarsen(inst, cl.representative).digest();
}

std::string census_csv(const ClusterCensus& census) {
    std::ostringstream os;
    os << "cluster_id,size,log_size_over_n,frozen_config_digest\n";
    os.precision(17);
    for (size_t i = 0; i < census.clusters.size(); ++i) {
        auto& c = census.clusters[i];
        long double ls = census.n ? log_of(c.size) / census.n : 0.0L;
        os << i << ',' << c.size.get_str() << ',' << static_cast<double>(ls) << ',' << c.frozen_digest << '\n';
    }
    return os.str();
}

PartitionValue partition_function(const ClusterCensus& census, long double lambda, std::optional<SizeWindow> window) {
    PartitionValue pv;
    pv.lambda = lambda;
    bool exact = lambda == 0.0L || lambda == 1.0L;
    mpq_class ex = 0;
    long double val = 0;
    for (auto& c : census.clusters) {
        if (window) {
            long double ls = log_of(c.size);
            long double lo = census.n * window->s;
            if (ls < lo || ls >= lo + 1) continue;
        }
        if (exact) ex += lambda == 0.0L ? mpq_class(1) : mpq_class(c.size);
        else val += std::exp(lambda * log_of(c.size));
    }
    if (exact) {
        pv.exact = ex;
        pv.value = to_ld(ex);
    } else {
        pv.value = val;
    }
    return pv;
}

mpq_class overlap(const Assignment& x1, const Assignment& x2) {
    if (x1.size() != x2.size() || x1.empty()) throw InputError("overlap needs equal nonzero lengths");
    long ham = 0;
    for (size_t v = 0; v < x1.size(); ++v) ham += x1[v] != x2[v];
    mpq_class r(static_cast<long>(x1.size()) - 2 * ham, static_cast<long>(x1.size()));
    r.canonicalize();
    return r;
}

std::optional<SolutionPair> sample_solution_pair(const std::vector<Assignment>& sols, uint64_t seed) {
    if (sols.empty()) return std::nullopt;
    Rng rng = Rng::substream(seed, stream::sampling);
    SolutionPair p;
    p.x1 = sols[rng.below(sols.size())];
    p.x2 = sols[rng.below(sols.size())];
    p.rho = overlap(p.x1, p.x2);
    return p;
}

std::optional<SolutionPair> sample_solution_pair(const Instance& inst, uint64_t seed) {
    return sample_solution_pair(enumerate_solutions(inst), seed);
}

std::vector<std::vector<int>> clause_partitions(int n, int d, int k) {
    int nd = n * d;
    if (nd % k != 0) throw ConfigError("nd not divisible by k");
    std::vector<std::vector<int>> out;
    std::vector<int> block(nd, -1), fill(nd / k, 0);
    int used = 0;
    // the smallest unassigned half-edge opens a new block, so each partition appears once
    auto rec = [&](auto&& self, int i) -> void {
        if (i == nd) {
            out.push_back(block);
            return;
        }
        for (int b = 0; b < used; ++b) {
            if (fill[b] == k) continue;
            block[i] = b;
            fill[b]++;
            self(self, i + 1);
            fill[b]--;
        }
        if (used < nd / k) {
            block[i] = used;
            fill[used]++;
            used++;
            self(self, i + 1);
            used--;
            fill[used]--;
        }
        block[i] = -1;
    };
    rec(rec, 0);
    return out;
}

uint64_t reduced_literal_count(int n, int d) { return 1ULL << (n * d - n); }

uint64_t expand_literals(int n, int d, uint64_t reduced) {
    uint64_t full = 0;
    int b = 0;
    for (int v = 0; v < n; ++v)
        for (int p = 1; p < d; ++p) full |= ((reduced >> b++) & 1) << (v * d + p);
    return full;
}

Instance instance_from_partition(int n, int d, int k, const std::vector<int>& blocks, uint64_t literal_bits) {
    int nd = n * d;
    std::vector<int> matching(nd), fill(nd / k, 0);
    for (int i = 0; i < nd; ++i) matching[i] = blocks[i] * k + fill[blocks[i]]++;
    std::vector<uint8_t> lits(nd);
    for (int i = 0; i < nd; ++i) lits[i] = (literal_bits >> i) & 1;
    return Instance(n, d, k, std::move(matching), std::move(lits));
}

PartitionValue exact_expected_partition(int n, int d, int k, long double lambda) {
    if (n * d > 12) throw CapacityError("expected partition needs nd <= 12");
    auto parts = clause_partitions(n, d, k);
    uint64_t lits = reduced_literal_count(n, d);
    bool exact = lambda == 0.0L || lambda == 1.0L;
    std::vector<mpz_class> ex(parts.size());
    std::vector<long double> fl(parts.size(), 0);
    parallel_chunks(parts.size(), [&](size_t c) {
        for (uint64_t r = 0; r < lits; ++r) {
            Instance inst = instance_from_partition(n, d, k, parts[c], expand_literals(n, d, r));
            auto sols = enumerate_solutions(inst);
            if (sols.empty()) continue;
            auto census = cluster_census(sols);
            if (exact) {
                ex[c] += lambda == 0.0L ? mpz_class(static_cast<unsigned long>(census.clusters.size())) : census.Z;
            } else {
                fl[c] += partition_function(census, lambda).value;
            }
        }
    });
    PartitionValue pv;
    pv.lambda = lambda;
    mpz_class denom = mpz_class(static_cast<unsigned long>(parts.size())) * mpz_class(static_cast<unsigned long>(lits));
    if (exact) {
        mpz_class tot = 0;
        for (auto& e : ex) tot += e;
        mpq_class q(tot, denom);
        q.canonicalize();
        pv.exact = q;
        pv.value = to_ld(q);
    } else {
        long double tot = 0;
        for (auto v : fl) tot += v;
        pv.value = tot / to_ld(mpq_class(denom));
    }
    return pv;
}

}  // namespace naesat
