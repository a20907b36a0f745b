#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mrta/env.hpp"
#include "mrta/policy.hpp"
#include "mrta/rng.hpp"

namespace mrta {

// One decision recorded during rollout collection: the observation the
// policy saw, what it sampled, and the log-probability/value at collection
// time. The task is continuing, so `done` stays false; it exists so the
// buffer layout survives an episodic variant.
struct Transition {
    Observation obs;
    int action = 0;
    double log_prob = 0.0;  // <= 0
    double reward = 0.0;
    double value = 0.0;
    bool done = false;
};

struct TrainConfig {
    double learning_rate = 3e-4;
    int rollout_length = 512;
    int epochs_per_update = 16;
    int minibatch_size = 32;
    double gamma = 0.99;
    double lambda = 0.95;
    double clip_epsilon = 0.2;
    double entropy_coef_start = 0.01;
    double entropy_coef_end = 0.001;
    double value_coef = 0.0002;
    double policy_coef = 0.02;
    int total_iterations = 100;
    int n_envs = 4;

    void validate() const;
    // Linear anneal of the entropy coefficient across the configured run.
    double entropy_coef_at(int iteration) const;
};

// Adam moment accumulators over the flat parameter vector.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;

    AdamState() : m(PolicyParams::total_size(), 0.0),
                  v(PolicyParams::total_size(), 0.0) {}
};

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;
};

// Generalized advantage estimation over one contiguous stream:
//   delta_t = r_t + gamma * v_{t+1} - v_t   (v_T = bootstrap_value)
//   A_t     = sum_k (gamma*lambda)^k delta_{t+k}
//   returns = A + values
// No terminal masking: the allocation task is continuing.
GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values, double bootstrap_value,
                      double gamma, double lambda);

// Rollout data for one update: transitions from n_envs independent
// environments written round-robin segment by segment. GAE runs per segment
// so temporal-difference errors never cross environments.
struct Rollout {
    std::vector<Transition> transitions;
    std::vector<std::size_t> segment_starts;  // one per env segment
    std::vector<double> bootstrap_values;     // value of each env's next state
};

// Collects exactly `length` transitions from one environment with sampled
// actions; the environment keeps running across rollout boundaries.
std::vector<Transition> collect_rollout(Environment& env,
                                        const PolicyParams& params, int length,
                                        Rng& rng);

// In-place shift/scale to zero mean and unit standard deviation (population
// std, 1e-8 floor). Applied to advantages once per update batch.
void normalize_advantages(std::span<double> advantages);

struct LossDiagnostics {
    double loss = 0.0;
    double policy_loss = 0.0;   // clipped surrogate, pre-coefficient
    double value_loss = 0.0;    // mean squared error, pre-coefficient
    double entropy = 0.0;       // mean categorical entropy
    double clip_fraction = 0.0;
};

// Clipped-surrogate PPO loss over a minibatch:
//   loss = policy_coef * L_clip + value_coef * L_value - entropy_coef * H
// Advantages must already be normalized across the update batch. When
// `grads` is non-null the analytic gradient is accumulated into it.
LossDiagnostics ppo_loss(const PolicyParams& params,
                         std::span<const Transition> minibatch,
                         std::span<const double> old_log_probs,
                         std::span<const double> advantages,
                         std::span<const double> returns,
                         const TrainConfig& config, double entropy_coef,
                         PolicyParams* grads = nullptr);

struct UpdateMetrics {
    int update_index = 0;
    std::int64_t env_steps = 0;
    double mean_reward = 0.0;
    double entropy = 0.0;
    double value_loss = 0.0;
    double policy_loss = 0.0;
    double entropy_coef = 0.0;
};

// One PPO update: epochs_per_update sweeps of shuffled minibatches with Adam
// steps at the configured rate. Throws NumericalError when a gradient goes
// non-finite, leaving params untouched.
UpdateMetrics update(PolicyParams& params, AdamState& optimizer,
                     const Rollout& rollout, const TrainConfig& config,
                     int iteration, Rng& rng);

struct TrainResult {
    PolicyParams params;
    std::vector<UpdateMetrics> history;
};

struct TrainHooks {
    // Called after each update; return false to stop early (checkpoint still
    // reflects all updates applied so far).
    std::function<bool(const PolicyParams&, const UpdateMetrics&)> on_update;
};

// Full training run: n_envs independent environment instances feed one
// rollout buffer, alternating collection and updates, logging one CSV row
// per update (columns: update_index, env_steps, mean_reward, entropy,
// value_loss, policy_loss, entropy_coef). Environments are built by
// `make_env(instance_index)` so callers control layout/generator/seed.
TrainResult train(const std::function<Environment(int)>& make_env,
                  const TrainConfig& config, std::uint64_t seed,
                  const std::filesystem::path& metrics_csv,
                  const TrainHooks& hooks = {});

// Formats one metrics row exactly as written to the CSV (used by both the
// trainer and the determinism tests).
std::string format_metrics_row(const UpdateMetrics& m);

}  // namespace mrta
