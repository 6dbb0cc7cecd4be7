#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace naesat {

// one exact-identity suite; notes hold skipped points and the first mismatches
struct SuiteResult {
    std::string name;
    long checked = 0, mismatches = 0;
    std::vector<std::string> notes;
    bool ok() const { return checked > 0 && mismatches == 0; }
};

struct VerifyOptions {
    uint64_t seed = 1;
    int instances = 200;
    bool inject_fault = false;  // doubles the first size formula value
};

using Point = std::array<int, 3>;   // (n, d, k)
using DkPair = std::array<int, 2>;  // (d, k)

// size_formula against brute force on every valid no-free-cycle configuration
SuiteResult size_formula_suite(const std::vector<Point>& points, const VerifyOptions& opt);
// frozen -> messages -> coloring -> messages -> frozen over all clause partitions with seeded literals, n <= n_max
SuiteResult bijection_suite(const std::vector<DkPair>& dk, int n_max, const VerifyOptions& opt);
// full enumeration against 2^n (1 - 2^{-k+1})^m and the restricted product formula at lambda in {0, 1, 1/2}
SuiteResult first_moment_suite(const std::vector<Point>& points, const VerifyOptions& opt);
// J_t against rooted embedding counts, and w-vs-wcom at lambda in {0, 1}
SuiteResult embedding_suite(const std::vector<DkPair>& dk, int L, const VerifyOptions& opt);
// closed-form vhat against literal enumeration over all boundary tuples, k <= k_max
SuiteResult vhat_suite(int k_max, const VerifyOptions& opt);

// (n, d) values feasible for the pairs with n <= n_max
std::vector<Point> points_up_to(const std::vector<DkPair>& dk, int n_max);

}  // namespace naesat
