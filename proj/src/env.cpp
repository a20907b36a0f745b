#include "mrta/env.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "mrta/error.hpp"

namespace mrta {

namespace {
constexpr double kNoiseMean = 0.25;
constexpr double kNoiseStd = 0.5;
constexpr double kNoiseFloor = 1e-6;
}  // namespace

double compute_reward(RewardScheme scheme, double pickup_cost,
                      double task_length, double diagonal) {
    double cost = 0.0;
    switch (scheme) {
        case RewardScheme::TTD:
            cost = pickup_cost;
            break;
        case RewardScheme::TaskLength:
            cost = task_length;
            break;
        case RewardScheme::TTDPlusTaskLength:
            cost = pickup_cost + task_length;
            break;
    }
    return -cost / diagonal;
}

std::pair<int, double> next_available_robot(WorldState& state) {
    int best = 0;
    for (int j = 1; j < static_cast<int>(state.robots.size()); ++j)
        if (state.robots[j].remaining < state.robots[best].remaining) best = j;
    const double elapsed = state.robots[best].remaining;
    for (RobotState& robot : state.robots) robot.remaining -= elapsed;
    state.robots[best].remaining = 0.0;
    state.clock += elapsed;
    state.selected = best;
    return {best, elapsed};
}

Environment::Environment(GridLayout layout, NavScheme nav, TaskGenerator gen,
                         EnvConfig config, std::uint64_t seed)
    : layout_(std::make_shared<const GridLayout>(std::move(layout))),
      provider_(nav == NavScheme::Direct ? CostProvider::direct()
                                         : CostProvider::astar(*layout_)),
      generator_(std::move(gen)),
      config_(config),
      seed_(seed),
      noise_rng_(make_rng(seed, 2)),
      placement_rng_(make_rng(seed, 3)),
      world_{{}, TaskQueue(config.queue_capacity)} {
    if (config_.n_robots < 1)
        throw InvalidConfig("need at least one robot");
    if (config_.n_robots >
        static_cast<int>(layout_->free_cells().size()))
        throw InvalidConfig("more robots than free cells");
    if (generator_.mode() == TaskGenMode::TwoTask &&
        config_.queue_capacity != 2)
        throw InvalidConfig("two-task generation requires queue capacity 2");
}

void Environment::reset() {
    // Sample distinct free cells without disturbing later draws more than
    // necessary: partial Fisher-Yates over a copy of the free list.
    std::vector<Cell> cells = layout_->free_cells();
    std::vector<RobotState> robots(config_.n_robots);
    for (int j = 0; j < config_.n_robots; ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, cells.size() - 1);
        std::swap(cells[j], cells[pick(placement_rng_)]);
        robots[j].position = cells[j];
        robots[j].remaining = 0.0;
    }
    // Stagger availability: robot 0 is free now, the rest become free at
    // uniform instants within the first five seconds.
    std::uniform_real_distribution<double> stagger(0.0, 5.0);
    for (int j = 1; j < config_.n_robots; ++j)
        robots[j].remaining = stagger(placement_rng_);
    reset_from(std::move(robots));
}

void Environment::reset_from(std::vector<RobotState> robots) {
    if (robots.empty()) throw InvalidConfig("need at least one robot");
    for (const RobotState& robot : robots) {
        if (!layout_->is_free(robot.position))
            throw InvalidConfig("robot placed on a blocked cell");
        if (robot.remaining < 0.0)
            throw InvalidConfig("negative remaining time");
    }
    world_.robots = std::move(robots);
    world_.queue = TaskQueue(config_.queue_capacity);
    world_.clock = 0.0;
    world_.cumulative_ttd = 0.0;
    world_.tasks_completed = 0;
    step_count_ = 0;
    generator_.fill(*layout_, provider_, world_.queue);
    advance_to_decision();
}

void Environment::advance_to_decision() { next_available_robot(world_); }

Observation Environment::observe() const {
    Observation obs;
    const double w = layout_->width();
    const double h = layout_->height();
    const double diag = layout_->diagonal();
    obs.diagonal = diag;
    obs.selected = world_.selected;

    obs.robot_features.reserve(world_.robots.size());
    obs.robot_positions.reserve(world_.robots.size());
    for (const RobotState& robot : world_.robots) {
        obs.robot_features.push_back({robot.position.x / w,
                                      robot.position.y / h,
                                      robot.remaining / diag});
        obs.robot_positions.push_back(robot.position);
    }
    obs.selected_features = obs.robot_features[world_.selected];

    const Cell selected_pos = world_.robots[world_.selected].position;
    obs.task_features.reserve(world_.queue.size());
    for (const Task& task : world_.queue.tasks()) {
        double k;
        try {
            k = provider_.cost(selected_pos, task.origin);
        } catch (const Unreachable&) {
            k = diag;  // sentinel: pessimistic but finite
        }
        obs.pickup_cost.push_back(k);
        obs.task_origins.push_back(task.origin);
        obs.task_features.push_back({task.origin.x / w, task.origin.y / h,
                                     task.destination.x / w,
                                     task.destination.y / h, k / diag,
                                     task.length / diag});
    }
    return obs;
}

StepRecord Environment::step(int action) {
    if (action < 0 || action >= world_.queue.size())
        throw InvalidAction("action " + std::to_string(action) +
                            " outside queue of size " +
                            std::to_string(world_.queue.size()));

    StepRecord rec;
    rec.step = step_count_++;
    rec.clock = world_.clock;
    rec.robot = world_.selected;
    rec.robots_before = world_.robots;
    rec.queue_index = action;

    RobotState& robot = world_.robots[world_.selected];
    rec.robot_position = robot.position;

    const Task task = world_.queue.consume(action);
    rec.task_id = task.id;
    const double pickup = provider_.cost(robot.position, task.origin);
    rec.pickup_cost = pickup;
    rec.reward = compute_reward(config_.reward, pickup, task.length,
                                layout_->diagonal());

    double noise = 0.0;
    if (config_.noise_on) {
        noise = std::max(
            kNoiseFloor,
            std::normal_distribution<double>(kNoiseMean, kNoiseStd)(noise_rng_));
    }
    robot.remaining = pickup + task.length + noise;
    robot.position = task.destination;

    refill_queue(world_.queue, generator_, *layout_, provider_);
    world_.cumulative_ttd += pickup;
    world_.tasks_completed += 1;
    advance_to_decision();
    return rec;
}

double Environment::makespan_now() const {
    double latest = 0.0;
    for (const RobotState& robot : world_.robots)
        latest = std::max(latest, robot.remaining);
    return world_.clock + latest;
}

EpisodeReport run_episode(Environment& env, const AllocatorFn& policy,
                          int n_allocations) {
    if (n_allocations < 1)
        throw InvalidConfig("episode needs at least one allocation");
    EpisodeReport report;
    report.steps.reserve(n_allocations);
    for (int i = 0; i < n_allocations; ++i) {
        const Observation obs = env.observe();
        const int action = policy(env, obs);
        StepRecord rec = env.step(action);
        report.total_ttd += rec.pickup_cost;
        report.steps.push_back(std::move(rec));
    }
    report.makespan = env.makespan_now();
    return report;
}

}  // namespace mrta
