#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mrta/policy.hpp"

namespace mrta {

// On-disk policy snapshot: a little-endian header with a named shape
// manifest, a config-text snapshot and the RNG seed, followed by the weights
// as little-endian float32. The float payload is the portability contract;
// in-memory doubles are truncated on save, so parameters that came out of
// load_checkpoint (or fresh random_init, which draws on the float grid)
// round-trip bit-for-bit.
struct CheckpointData {
    PolicyParams params;
    std::string config_text;
    std::uint64_t seed = 0;
};

void save_checkpoint(const PolicyParams& params, const std::string& config_text,
                     std::uint64_t seed, const std::filesystem::path& path);

// Throws CheckpointError on bad magic, version mismatch, manifest/shape
// mismatch, or a truncated payload.
CheckpointData load_checkpoint(const std::filesystem::path& path);

}  // namespace mrta
