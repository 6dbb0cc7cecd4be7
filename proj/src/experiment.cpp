#include "naesat/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "naesat/errors.hpp"
#include "naesat/frozen.hpp"
#include "naesat/oracle.hpp"
#include "naesat/parallel.hpp"
#include "naesat/rng.hpp"

namespace naesat {

namespace {

uint64_t derive(uint64_t seed, uint64_t a, uint64_t b) {
    SplitMix64 sm(seed ^ (a * 0xD1B54A32D192ED03ULL) ^ (b * 0x9E3779B97F4A7C15ULL));
    return sm.next();
}

Assignment negated(Assignment x) {
    for (auto& b : x) b ^= 1;
    return x;
}

long rho_numerator(const Assignment& x1, const Assignment& x2) {
    long same = 0;
    for (size_t v = 0; v < x1.size(); ++v) same += x1[v] == x2[v];
    return 2 * same - static_cast<long>(x1.size());
}

struct Slot {
    long resampled = 0, inconsistencies = 0;
    bool spot_ok = true;
    std::vector<long> rho;
    std::vector<long> partner;  // n rho of (x1, not x2)
    std::string first_issue;
};

}  // namespace

OverlapResult overlap_experiment(const OverlapOptions& opt) {
    if (opt.trials < 1 || opt.instances < 1) throw ConfigError("trials and instances must be positive");
    if (opt.n > 32) throw CapacityError("overlap experiment enumerates solutions, needs n <= 32");
    if ((opt.n * opt.d) % opt.k != 0) throw ConfigError("nd not divisible by k");
    OverlapResult res;
    res.opt = opt;
    int slots = static_cast<int>(std::min<long>(opt.instances, opt.trials));
    std::vector<Slot> out(slots);
    parallel_chunks(slots, [&](size_t s) {
        Slot& sl = out[s];
        auto issue = [&](const std::string& msg) {
            ++sl.inconsistencies;
            if (sl.first_issue.empty()) sl.first_issue = "instance slot " + std::to_string(s) + ": " + msg;
        };
        Instance inst;
        std::vector<Assignment> sols;
        for (uint64_t attempt = 0;; ++attempt) {
            inst = generate(opt.n, opt.d, opt.k, derive(opt.seed, s, attempt));
            sols = enumerate_solutions(inst);
            if (!sols.empty()) break;
            ++sl.resampled;
            if (attempt > 1000) throw ValidationError("no satisfiable instance in 1000 draws");
        }
        auto census = cluster_census(sols);
        attach_frozen(inst, sols, census);
        std::vector<int> cluster_of(sols.size(), -1);
        mpz_class total = 0;
        for (size_t c = 0; c < census.clusters.size(); ++c) {
            total += census.clusters[c].size;
            for (size_t i : census.clusters[c].members) cluster_of[i] = static_cast<int>(c);
        }
        if (total != census.Z || census.Z != static_cast<long>(sols.size())) issue("cluster sizes do not sum to Z");
        auto locate = [&](const Assignment& x) -> int {
            auto it = std::lower_bound(sols.begin(), sols.end(), x);
            if (it == sols.end() || *it != x) return -1;
            return cluster_of[it - sols.begin()];
        };
        long first = s * opt.trials / slots, last = (s + 1) * opt.trials / slots;
        for (long t = first; t < last; ++t) {
            auto pair = sample_solution_pair(sols, derive(derive(opt.seed, stream::sampling, s), t, 0));
            Assignment x1 = pair->x1, x2 = opt.same_solution ? pair->x1 : pair->x2;
            Assignment nx2 = negated(x2);
            int c1 = locate(x1), c2 = locate(x2), cn = locate(nx2);
            if (c1 < 0 || c2 < 0 || cn < 0) {
                issue("sampled assignment or its negation missing from the solution list");
                continue;
            }
            FrozenConfig f1 = coarsen(inst, x1), f2 = coarsen(inst, x2);
            if (f1.digest() != census.clusters[c1].frozen_digest || f2.digest() != census.clusters[c2].frozen_digest)
                issue("coarsened sample differs from its cluster's frozen configuration");
            if (coarsen(inst, nx2) != negate(f2)) issue("coarsening does not commute with negation");
            long r = rho_numerator(x1, x2);
            mpq_class rho(r, opt.n);
            rho.canonicalize();
            if (overlap(x1, x2) != rho) issue("overlap differs from its numerator");
            if (overlap(x1, x1) != 1 || overlap(x1, negated(x1)) != -1) sl.spot_ok = false;
            sl.rho.push_back(r);
            sl.partner.push_back(rho_numerator(x1, nx2));
        }
    });
    long double band = std::pow(static_cast<long double>(opt.n), -1.0L / 3);
    for (int s = 0; s < slots; ++s) {
        res.resampled += out[s].resampled;
        res.inconsistencies += out[s].inconsistencies;
        res.spot_checks = res.spot_checks && out[s].spot_ok;
        if (!out[s].first_issue.empty() && res.notes.size() < 10) res.notes.push_back(out[s].first_issue);
        for (size_t i = 0; i < out[s].rho.size(); ++i) {
            long r = out[s].rho[i];
            res.rho_num.push_back(r);
            res.histogram[r]++;
            res.histogram[out[s].partner[i]]++;
            long double rho = static_cast<long double>(r) / opt.n;
            if (fabsl(rho) <= band)
                ++res.near_zero;
            else if (opt.p_star && fabsl(fabsl(rho) - *opt.p_star) <= band)
                ++res.near_p_star;
            else
                ++res.rest;
        }
    }
    res.symmetric = true;
    for (auto& [r, c] : res.histogram) {
        auto it = res.histogram.find(-r);
        if (it == res.histogram.end() || it->second != c) res.symmetric = false;
    }
    return res;
}

std::string overlap_csv(const OverlapResult& r) {
    std::ostringstream os;
    os << "trial,rho_numerator,n\n";
    for (size_t t = 0; t < r.rho_num.size(); ++t) os << t << "," << r.rho_num[t] << "," << r.opt.n << "\n";
    return os.str();
}

}  // namespace naesat
