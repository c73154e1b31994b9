#pragma once

#include <cstdint>
#include <random>

namespace hazardcp {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates consecutive inputs.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-derived sub-seed for path `index` of a run seeded with `master`.
// Constant time, so workers can seed any path without a shared stream.
inline std::uint64_t sub_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master ^ mix64(index + 1));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace hazardcp
