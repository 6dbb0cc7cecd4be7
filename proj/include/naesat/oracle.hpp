#pragma once
#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "naesat/instance.hpp"

namespace naesat {

// assignments packed as bit v = x_v (n <= 32)
uint64_t pack(const Assignment& x);
Assignment unpack(uint64_t mask, int n);

// solutions in lexicographic order of (x_0, ..., x_{n-1})
std::vector<Assignment> enumerate_solutions(const Instance& inst);
// packed variant used by the sweeps
std::vector<uint64_t> solution_masks(const Instance& inst);

struct Cluster {
    Assignment representative;  // lexicographically smallest member
    mpz_class size;
    std::vector<size_t> members;  // indices into the solution list
    std::string frozen_digest;    // filled by attach_frozen
};

struct ClusterCensus {
    std::vector<Cluster> clusters;
    mpz_class Z;
    int n = 0;
};

// connected components of the Hamming-1 graph; merge_threshold > 1 additionally merges
// components at Hamming distance <= merge_threshold
ClusterCensus cluster_census(const std::vector<Assignment>& sols, int merge_threshold = 1);
// independent breadth-first census used as a cross-check
ClusterCensus cluster_census_bfs(const std::vector<Assignment>& sols);
// coarsens each cluster representative and records its digest
void attach_frozen(const Instance& inst, const std::vector<Assignment>& sols, ClusterCensus& census);
std::string census_csv(const ClusterCensus& census);

struct PartitionValue {
    long double lambda = 0;
    std::optional<mpq_class> exact;  // set for lambda in {0, 1}
    long double value = 0;
};

struct SizeWindow {
    long double s;  // cluster counted iff e^{ns} <= size < e^{ns+1}
};

PartitionValue partition_function(const ClusterCensus& census, long double lambda,
                                  std::optional<SizeWindow> window = std::nullopt);

// (n - 2 Ham) / n
mpq_class overlap(const Assignment& x1, const Assignment& x2);

struct SolutionPair {
    Assignment x1, x2;
    mpq_class rho;
};
// two independent uniform draws; nullopt when the instance is unsatisfiable
std::optional<SolutionPair> sample_solution_pair(const std::vector<Assignment>& sols, uint64_t seed);
std::optional<SolutionPair> sample_solution_pair(const Instance& inst, uint64_t seed);

// average of the cluster partition function over all matchings and literal vectors (nd <= 12)
PartitionValue exact_expected_partition(int n, int d, int k, long double lambda);

// representatives of the instance space up to clause-slot permutations and per-variable literal flips:
// each partition of the nd variable half-edges into m blocks of size k (block of half-edge i),
// and literal vectors with each variable's first literal fixed to 0
std::vector<std::vector<int>> clause_partitions(int n, int d, int k);
Instance instance_from_partition(int n, int d, int k, const std::vector<int>& blocks, uint64_t literal_bits);
// number of literal vectors per partition after fixing the first literal of each variable
uint64_t reduced_literal_count(int n, int d);
uint64_t expand_literals(int n, int d, uint64_t reduced);

}  // namespace naesat
