#include "naesat/instance.hpp"

#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "naesat/errors.hpp"
#include "naesat/rng.hpp"

namespace naesat {

Instance::Instance(int n, int d, int k, std::vector<int> matching, std::vector<uint8_t> literals)
    : n_(n), d_(d), k_(k), matching_(std::move(matching)), literals_(std::move(literals)) {
    if (n < 1 || d < 1 || k < 1) throw ConfigError("n, d, k must be positive");
    if ((n * d) % k != 0) throw ConfigError("nd not divisible by k");
    m_ = n * d / k;
    int nd = n * d;
    if (static_cast<int>(matching_.size()) != nd) throw ConfigError("matching length must be nd");
    if (static_cast<int>(literals_.size()) != nd) throw ConfigError("literals length must be nd");
    inverse_.assign(nd, -1);
    for (int i = 0; i < nd; ++i) {
        int j = matching_[i];
        if (j < 0 || j >= nd || inverse_[j] != -1) throw ConfigError("matching is not a permutation");
        inverse_[j] = i;
    }
    for (auto l : literals_)
        if (l > 1) throw ConfigError("literal bits must be 0 or 1");
}

bool Instance::has_parallel_edges() const {
    std::set<std::pair<int, int>> seen;
    for (int i = 0; i < edges(); ++i)
        if (!seen.emplace(var_of(i), clause_of(i)).second) return true;
    return false;
}

bool Instance::operator==(const Instance& o) const {
    return n_ == o.n_ && d_ == o.d_ && k_ == o.k_ && matching_ == o.matching_ && literals_ == o.literals_;
}

Instance generate(int n, int d, int k, uint64_t seed) {
    if (n < 1 || d < 1 || k < 1) throw ConfigError("n, d, k must be positive");
    if ((n * d) % k != 0) throw ConfigError("nd not divisible by k");
    int nd = n * d;
    std::vector<int> perm(nd);
    for (int i = 0; i < nd; ++i) perm[i] = i;
    Rng mrng = Rng::substream(seed, stream::matching);
    mrng.shuffle(perm);
    Rng lrng = Rng::substream(seed, stream::literals);
    std::vector<uint8_t> lits(nd);
    for (auto& l : lits) l = static_cast<uint8_t>(lrng.next() >> 63);
    return Instance(n, d, k, std::move(perm), std::move(lits));
}

bool eval_nae(const Instance& inst, const Assignment& x) {
    if (static_cast<int>(x.size()) != inst.n()) throw InputError("assignment length differs from n");
    int k = inst.k();
    for (int a = 0; a < inst.m(); ++a) {
        int seen = 0;
        for (int s = 0; s < k; ++s) {
            int i = inst.edge_at(a * k + s);
            seen |= 1 << (x[inst.var_of(i)] ^ inst.literal(i));
        }
        if (seen != 3) return false;
    }
    return true;
}

std::string serialize(const Instance& inst) {
    nlohmann::ordered_json j;
    j["n"] = inst.n();
    j["d"] = inst.d();
    j["k"] = inst.k();
    j["matching"] = inst.matching();
    std::vector<int> lits(inst.literals().begin(), inst.literals().end());
    j["literals"] = lits;
    return j.dump();
}

Instance parse(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("malformed document: ") + e.what());
    }
    auto field = [&](const char* name) -> const nlohmann::json& {
        if (!j.contains(name)) throw ParseError(std::string("missing field ") + name);
        return j.at(name);
    };
    int n, d, k;
    std::vector<int> matching, lits;
    try {
        n = field("n").get<int>();
        d = field("d").get<int>();
        k = field("k").get<int>();
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("fields n, d, k must be integers");
    }
    try {
        matching = field("matching").get<std::vector<int>>();
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("field matching must be an integer array");
    }
    try {
        lits = field("literals").get<std::vector<int>>();
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("field literals must be an integer array");
    }
    if (n < 1 || d < 1 || k < 1) throw ParseError("field n/d/k: must be positive");
    if ((n * d) % k != 0) throw ParseError("field k: nd != mk");
    if (static_cast<int>(matching.size()) != n * d) throw ParseError("field matching: length != nd");
    if (static_cast<int>(lits.size()) != n * d) throw ParseError("field literals: length != nd");
    std::vector<uint8_t> lb;
    for (int l : lits) {
        if (l != 0 && l != 1) throw ParseError("field literals: entries must be 0 or 1");
        lb.push_back(static_cast<uint8_t>(l));
    }
    try {
        return Instance(n, d, k, std::move(matching), std::move(lb));
    } catch (const ConfigError&) {
        throw ParseError("field matching: not a permutation");
    }
}

std::string to_dimacs(const Instance& inst) {
    std::ostringstream os;
    os << "c d-regular k-NAE-SAT d=" << inst.d() << " k=" << inst.k() << "\n";
    os << "p nae " << inst.n() << " " << inst.m() << "\n";
    for (int a = 0; a < inst.m(); ++a) {
        for (int s = 0; s < inst.k(); ++s) {
            int i = inst.edge_at(a * inst.k() + s);
            int v = inst.var_of(i) + 1;
            os << (inst.literal(i) ? -v : v) << " ";
        }
        os << "0\n";
    }
    return os.str();
}

}  // namespace naesat
