#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mrta/env.hpp"
#include "mrta/tasking.hpp"
#include "mrta/training.hpp"

namespace mrta {

// Experiment description, loadable from a flat key-value file (one
// `key = value` per line, `#` comments). Every key mirrors a field below;
// CLI flags override file values.
struct ExperimentConfig {
    std::string layout_file;    // path to a layout text file
    std::string layout_preset;  // "A".."E"; used when layout_file is empty
    int robots = 10;
    int queue_capacity = 10;
    NavScheme navigation = NavScheme::Direct;
    RewardScheme reward = RewardScheme::TTD;
    TaskGenMode tasks = TaskGenMode::Random;
    std::uint64_t seed = 0;
    int task_budget = 500;  // allocations per evaluation episode
    bool noise = true;
    TrainConfig train;

    void validate() const;
    // Builds the layout this config names (file wins over preset; with
    // neither set, an open 10x10 grid).
    GridLayout make_layout() const;
    Environment make_environment(std::uint64_t env_seed) const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Round-trippable key-value dump (stored in checkpoints).
std::string config_to_text(const ExperimentConfig& config);

std::string to_string(NavScheme scheme);
std::string to_string(RewardScheme scheme);
std::string to_string(TaskGenMode mode);

}  // namespace mrta
