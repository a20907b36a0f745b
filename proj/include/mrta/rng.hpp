#pragma once

#include <cstdint>
#include <random>

namespace mrta {

// All randomness in the library flows through mt19937_64 instances seeded
// deterministically from a master seed. Separate streams (task generation,
// completion noise, robot placement, action sampling) are derived with
// splitmix64 so that e.g. the task sequence for a seed does not depend on
// which policy is being evaluated.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Stream `stream` of the generator family identified by `seed`.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t s = seed ^ (0xd1b54a32d192ed03ull * (stream + 1));
    std::uint64_t v = splitmix64(s);
    return Rng(v);
}

}  // namespace mrta
