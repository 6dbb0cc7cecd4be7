#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace naesat {

struct OverlapOptions {
    int n = 24, d = 2, k = 3;
    long trials = 10000;
    int instances = 100;  // trials are spread evenly over this many instances
    uint64_t seed = 1;
    bool same_solution = false;  // debug: x2 = x1
    std::optional<long double> p_star;
};

// sample -> coarsen -> census cross-reference, one solution pair per trial
struct OverlapResult {
    OverlapOptions opt;
    std::vector<long> rho_num;        // n rho per trial
    std::map<long, long> histogram;   // n rho over trials and their negation partners (x1, not x2)
    long resampled = 0;               // unsatisfiable instance draws replaced
    long inconsistencies = 0;
    std::vector<std::string> notes;
    bool symmetric = false, spot_checks = true;
    long near_zero = 0, near_p_star = 0, rest = 0;  // |rho| <= n^{-1/3}, ||rho| - p*| <= n^{-1/3}
    bool ok() const { return symmetric && spot_checks && inconsistencies == 0; }
};

OverlapResult overlap_experiment(const OverlapOptions& opt);
// trial, rho_numerator, n
std::string overlap_csv(const OverlapResult& r);

}  // namespace naesat
