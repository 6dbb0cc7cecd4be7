#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace naesat {

using Assignment = std::vector<uint8_t>;

// d-regular k-NAE-SAT formula as a half-edge matching.
// variable half-edge i belongs to variable i/d, clause half-edge j to clause j/k.
class Instance {
public:
    Instance() = default;
    Instance(int n, int d, int k, std::vector<int> matching, std::vector<uint8_t> literals);

    int n() const { return n_; }
    int d() const { return d_; }
    int k() const { return k_; }
    int m() const { return m_; }
    int edges() const { return n_ * d_; }

    // clause half-edge of variable half-edge i
    int slot(int i) const { return matching_[i]; }
    // variable half-edge at clause half-edge j
    int edge_at(int j) const { return inverse_[j]; }
    int var_of(int i) const { return i / d_; }
    int clause_of(int i) const { return matching_[i] / k_; }
    uint8_t literal(int i) const { return literals_[i]; }

    const std::vector<int>& matching() const { return matching_; }
    const std::vector<uint8_t>& literals() const { return literals_; }

    bool has_parallel_edges() const;
    bool operator==(const Instance& o) const;

private:
    int n_ = 0, d_ = 0, k_ = 0, m_ = 0;
    std::vector<int> matching_;
    std::vector<int> inverse_;
    std::vector<uint8_t> literals_;
};

Instance generate(int n, int d, int k, uint64_t seed);

// literal-adjusted value of edge i under x is x[var] ^ literal; clause is satisfied iff values are non-constant
bool eval_nae(const Instance& inst, const Assignment& x);

std::string serialize(const Instance& inst);
Instance parse(const std::string& text);
std::string to_dimacs(const Instance& inst);

}  // namespace naesat
