#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mrta/config.hpp"
#include "mrta/env.hpp"
#include "mrta/policy.hpp"

namespace mrta {

// Replay scenario: fixed robot starts and a finite ordered task list played
// against a queue of the stated capacity. File format (one directive per
// line, `#` comments):
//   grid <width> <height>      (open grid)  -- or --  layout <path>
//   nav direct|astar           (default direct)
//   queue <capacity>
//   robot <x> <y> <remaining>
//   task <ox> <oy> <dx> <dy>   (listed in arrival order, ids 1-based)
struct Scenario {
    GridLayout layout;
    NavScheme navigation = NavScheme::Direct;
    int queue_capacity = 2;
    std::vector<RobotState> robots;
    std::vector<Task> tasks;
};

Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text,
                        const std::filesystem::path& base_dir = {});

// Policy selector shared by the subcommands: "mpdm", "rbts", or a checkpoint
// path (evaluated with argmax action selection).
struct PolicySpec {
    enum class Kind { Mpdm, Rbts, Checkpoint } kind = Kind::Mpdm;
    std::filesystem::path checkpoint;
    std::string label;

    static PolicySpec parse(const std::string& text);
};

AllocatorFn make_allocator(const PolicySpec& spec);

struct SeedOutcome {
    std::uint64_t seed = 0;
    double total_ttd = 0.0;
    double makespan = 0.0;
};

struct PolicyEvaluation {
    std::string label;
    std::vector<SeedOutcome> per_seed;
    double mean_ttd = 0.0;
    double std_ttd = 0.0;
    double mean_makespan = 0.0;
    double std_makespan = 0.0;
};

struct EvaluateReport {
    PolicyEvaluation policy;
    std::optional<PolicyEvaluation> baseline;
    // (baseline - policy) / baseline * 100, when a baseline is present.
    double improvement_pct = 0.0;
};

// Runs `n_seeds` fixed-seed episodes of `task_budget` allocations each and
// reports mean +- std TTD and makespan; with a baseline spec, also the
// percent TTD improvement. The task sequence per seed is identical across
// policies.
EvaluateReport cmd_evaluate(const ExperimentConfig& config,
                            const PolicySpec& policy,
                            const std::optional<PolicySpec>& baseline,
                            int n_seeds = 5);

struct ReplayReport {
    EpisodeReport episode;
    std::vector<std::string> table;  // aligned per-step rows
    std::string policy_label;
};

// Replays a scenario with a policy or an explicit 1-based task-id sequence;
// noise is disabled so the trace is exact.
ReplayReport cmd_replay(const Scenario& scenario, const PolicySpec& policy);
ReplayReport cmd_replay(const Scenario& scenario,
                        const std::vector<int>& task_id_sequence);

struct BenchRow {
    int robots = 0;
    int tasks = 0;
    double mean_us = 0.0;   // per forward pass
    std::size_t param_count = 0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
};

// Times the policy forward pass on synthetic observations for every
// robots x tasks combination, averaging over `calls` invocations.
BenchReport cmd_bench(const std::vector<int>& robot_counts,
                      const std::vector<int>& task_counts,
                      const PolicyParams& params, int calls = 1000);

// Text renderers shared by the CLI and the determinism tests.
std::string render(const EvaluateReport& report);
std::string render(const ReplayReport& report);
std::string render(const BenchReport& report);
std::string render_csv(const EvaluateReport& report);
std::string render_csv(const ReplayReport& report);
std::string render_csv(const BenchReport& report);

}  // namespace mrta
