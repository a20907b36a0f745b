#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "mrta/layout.hpp"
#include "mrta/navigation.hpp"
#include "mrta/rng.hpp"
#include "mrta/tasking.hpp"

namespace mrta {

// Position and time left on the current task. A busy robot is reported at
// the destination of the task it is serving (the only position any formula
// ever reads); remaining is 0 for an idle robot.
struct RobotState {
    Cell position;
    double remaining = 0.0;
};

struct WorldState {
    std::vector<RobotState> robots;
    TaskQueue queue;
    int selected = 0;  // robot awaiting allocation
    double clock = 0.0;
    double cumulative_ttd = 0.0;
    std::int64_t tasks_completed = 0;
};

// Feature view the policy consumes. Coordinates are divided by grid
// width/height, distances and times by the grid diagonal. Raw (unnormalized)
// pickup costs and cell positions ride along for the baselines and for
// reporting; selected_features mirrors robot_features[selected].
struct Observation {
    std::vector<std::array<double, 3>> robot_features;  // x, y, remaining
    std::vector<std::array<double, 6>> task_features;   // ox, oy, dx, dy, k, l
    std::array<double, 3> selected_features{};
    int selected = 0;

    std::vector<double> pickup_cost;  // k_i before normalization
    std::vector<Cell> task_origins;
    std::vector<Cell> robot_positions;
    double diagonal = 1.0;

    int n_robots() const { return static_cast<int>(robot_features.size()); }
    int n_tasks() const { return static_cast<int>(task_features.size()); }
};

enum class RewardScheme { TTD, TaskLength, TTDPlusTaskLength };

// Per-step reward, normalized by the grid diagonal:
//   TTD                -> -pickup_cost / diagonal
//   TaskLength         -> -task_length / diagonal
//   TTDPlusTaskLength  -> -(pickup_cost + task_length) / diagonal
double compute_reward(RewardScheme scheme, double pickup_cost,
                      double task_length, double diagonal);

// Advances to the next decision point: picks the robot with minimal
// remaining time (lowest index on ties), subtracts that minimum from every
// robot and returns {robot index, elapsed seconds}.
std::pair<int, double> next_available_robot(WorldState& state);

struct EnvConfig {
    int n_robots = 10;
    int queue_capacity = 10;
    RewardScheme reward = RewardScheme::TTD;
    bool noise_on = true;
};

struct StepRecord {
    int step = 0;
    double clock = 0.0;  // decision instant
    int robot = 0;
    Cell robot_position;            // where the robot was allocated
    std::int64_t task_id = 0;
    int queue_index = 0;
    double pickup_cost = 0.0;       // TTD increment
    double reward = 0.0;
    std::vector<RobotState> robots_before;  // state at the decision point
};

struct EpisodeReport {
    double total_ttd = 0.0;
    double makespan = 0.0;
    std::vector<StepRecord> steps;
};

// Event-driven MDP simulator. Time jumps from one robot-available instant to
// the next; a small Gaussian noise term (mean 0.25, std 0.5, clamped below
// at 1e-6) on task completion keeps those instants distinct when enabled.
// Single writer per instance; run independent instances for parallel rollout
// collection.
class Environment {
public:
    Environment(GridLayout layout, NavScheme nav, TaskGenerator gen,
                EnvConfig config, std::uint64_t seed);

    // Places robots uniformly on distinct free cells, staggers availability
    // (one robot available immediately, the rest uniform in [0,5) seconds),
    // fills the queue and advances to the first decision point.
    void reset();
    // Fixture entry: starts from the given robot states instead of sampling.
    void reset_from(std::vector<RobotState> robots);

    // Allocates queue slot `action` to the selected robot and advances to
    // the next decision point. Throws InvalidAction for a bad slot index.
    StepRecord step(int action);

    Observation observe() const;

    const WorldState& world() const { return world_; }
    const GridLayout& layout() const { return *layout_; }
    const CostProvider& provider() const { return provider_; }
    const EnvConfig& config() const { return config_; }
    // Completion instant of the latest-finishing allocated task.
    double makespan_now() const;
    std::int64_t steps_taken() const { return world_.tasks_completed; }

private:
    void advance_to_decision();

    // Heap-owned so the provider's borrow survives moves of the Environment.
    std::shared_ptr<const GridLayout> layout_;
    CostProvider provider_;
    TaskGenerator generator_;
    EnvConfig config_;
    std::uint64_t seed_;
    Rng noise_rng_;
    Rng placement_rng_;
    WorldState world_;
    int step_count_ = 0;
};

// policy(env, observation) -> queue slot index.
using AllocatorFn = std::function<int(const Environment&, const Observation&)>;

// Runs `n_allocations` decisions and aggregates total TTD (sum of pickup
// costs) and makespan (completion instant of the last-finishing task).
EpisodeReport run_episode(Environment& env, const AllocatorFn& policy,
                          int n_allocations);

}  // namespace mrta
