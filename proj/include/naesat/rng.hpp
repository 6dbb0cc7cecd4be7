#pragma once
#include <cstdint>
#include <utility>
#include <vector>

namespace naesat {

// splitmix64, used to seed xoshiro256** and to derive substreams
struct SplitMix64 {
    uint64_t s;
    explicit SplitMix64(uint64_t seed) : s(seed) {}
    uint64_t next() {
        uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

// xoshiro256**; substream(seed, tag) seeds splitmix64 with seed ^ (tag * 0xD1B54A32D192ED03)
class Rng {
public:
    explicit Rng(uint64_t seed);
    static Rng substream(uint64_t seed, uint64_t tag);

    uint64_t next();
    // uniform in [0, bound), Lemire's multiply-shift with rejection
    uint64_t below(uint64_t bound);
    double uniform01();

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    uint64_t s_[4];
};

namespace stream {
constexpr uint64_t matching = 1;
constexpr uint64_t literals = 2;
constexpr uint64_t sampling = 3;
constexpr uint64_t coarsen_order = 4;
constexpr uint64_t bp_init = 5;
}  // namespace stream

}  // namespace naesat
