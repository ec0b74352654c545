#pragma once

#include <cstdint>
#include <random>

namespace gmed {

// Named RNG streams derived from one run seed. Each consumer owns its own
// stream so that disabling a feature (e.g. editing) never shifts the draws
// seen by the others; the alpha=0 trajectory-equality check depends on this.
enum class RngStream : std::uint64_t {
    Init = 1,
    DataOrder = 2,
    Reservoir = 3,
    MemorySample = 4,
    EditNoise = 5,
    Augment = 6,
    Fuzzify = 7,
    OracleHistory = 8,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))));
}

}  // namespace gmed
