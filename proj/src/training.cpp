#include "mrta/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "mrta/error.hpp"
#include "mrta/kernels.hpp"

namespace mrta {

namespace {
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
}  // namespace

void TrainConfig::validate() const {
    if (gamma <= 0.0 || gamma >= 1.0)
        throw InvalidConfig("gamma must lie in (0, 1)");
    if (lambda < 0.0 || lambda > 1.0)
        throw InvalidConfig("lambda must lie in [0, 1]");
    if (learning_rate < 0.0 || clip_epsilon <= 0.0)
        throw InvalidConfig("learning rate must be >= 0 and clip epsilon > 0");
    if (entropy_coef_start < 0.0 || entropy_coef_end < 0.0 ||
        value_coef < 0.0 || policy_coef < 0.0)
        throw InvalidConfig("loss coefficients must be nonnegative");
    if (rollout_length < 1 || minibatch_size < 1 || epochs_per_update < 1 ||
        n_envs < 1)
        throw InvalidConfig("rollout/minibatch/epoch/env counts must be >= 1");
    if (rollout_length % n_envs != 0)
        throw InvalidConfig("rollout length must divide evenly across envs");
    if (total_iterations < 0)
        throw InvalidConfig("total iterations must be >= 0");
}

double TrainConfig::entropy_coef_at(int iteration) const {
    if (total_iterations <= 1) return entropy_coef_start;
    const double t = std::min(
        1.0, static_cast<double>(iteration) / (total_iterations - 1));
    return entropy_coef_start + t * (entropy_coef_end - entropy_coef_start);
}

GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values, double bootstrap_value,
                      double gamma, double lambda) {
    if (rewards.size() != values.size())
        throw InvalidConfig("rewards/values length mismatch");
    const int n = static_cast<int>(rewards.size());
    GaeResult out;
    out.advantages.resize(n);
    out.returns.resize(n);
    double carry = 0.0;
    for (int t = n - 1; t >= 0; --t) {
        const double next_value = t + 1 < n ? values[t + 1] : bootstrap_value;
        const double delta = rewards[t] + gamma * next_value - values[t];
        carry = delta + gamma * lambda * carry;
        out.advantages[t] = carry;
        out.returns[t] = carry + values[t];
    }
    return out;
}

std::vector<Transition> collect_rollout(Environment& env,
                                        const PolicyParams& params, int length,
                                        Rng& rng) {
    if (length < 1) throw InvalidConfig("rollout length must be >= 1");
    std::vector<Transition> transitions;
    transitions.reserve(length);
    ForwardTrace trace;
    for (int t = 0; t < length; ++t) {
        Transition tr;
        tr.obs = env.observe();
        const ForwardResult fwd = forward(params, tr.obs, trace);
        tr.action = select_action(fwd.dist, SelectMode::Sample, &rng);
        tr.log_prob = std::log(fwd.dist.probabilities[tr.action]);
        tr.value = fwd.value;
        tr.reward = env.step(tr.action).reward;
        transitions.push_back(std::move(tr));
    }
    return transitions;
}

void normalize_advantages(std::span<double> advantages) {
    if (advantages.empty()) return;
    const double n = static_cast<double>(advantages.size());
    double mean = 0.0;
    for (double a : advantages) mean += a;
    mean /= n;
    double var = 0.0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    const double scale = 1.0 / (std::sqrt(var / n) + 1e-8);
    for (double& a : advantages) a = (a - mean) * scale;
}

LossDiagnostics ppo_loss(const PolicyParams& params,
                         std::span<const Transition> minibatch,
                         std::span<const double> old_log_probs,
                         std::span<const double> advantages,
                         std::span<const double> returns,
                         const TrainConfig& config, double entropy_coef,
                         PolicyParams* grads) {
    const int n = static_cast<int>(minibatch.size());
    if (n == 0) throw InvalidConfig("empty minibatch");
    if (old_log_probs.size() != minibatch.size() ||
        advantages.size() != minibatch.size() ||
        returns.size() != minibatch.size())
        throw InvalidConfig("minibatch side-array length mismatch");

    const double inv_n = 1.0 / n;
    const double clip_lo = 1.0 - config.clip_epsilon;
    const double clip_hi = 1.0 + config.clip_epsilon;

    LossDiagnostics diag;
    ForwardTrace trace;
    std::vector<double> score_grad;

    for (int b = 0; b < n; ++b) {
        const Transition& tr = minibatch[b];
        const ForwardResult fwd = forward(params, tr.obs, trace);
        const auto& probs = fwd.dist.probabilities;
        const int n_tasks = static_cast<int>(probs.size());

        const double log_prob = std::log(probs[tr.action]);
        const double ratio = std::exp(log_prob - old_log_probs[b]);
        const double adv = advantages[b];
        const double unclipped = ratio * adv;
        const double clipped = std::clamp(ratio, clip_lo, clip_hi) * adv;
        const bool use_unclipped = unclipped <= clipped;
        diag.policy_loss += -std::min(unclipped, clipped) * inv_n;
        if (ratio < clip_lo || ratio > clip_hi) diag.clip_fraction += inv_n;

        double entropy = 0.0;
        for (double p : probs)
            if (p > 0.0) entropy -= p * std::log(p);
        diag.entropy += entropy * inv_n;

        const double value_err = fwd.value - returns[b];
        diag.value_loss += value_err * value_err * inv_n;

        if (grads != nullptr) {
            // d(batch loss)/d(log pi(a)): the surrogate only moves when the
            // unclipped branch is active.
            const double g_logp =
                use_unclipped ? -config.policy_coef * ratio * adv * inv_n : 0.0;
            score_grad.assign(n_tasks, 0.0);
            for (int i = 0; i < n_tasks; ++i) {
                const double ind = i == tr.action ? 1.0 : 0.0;
                // log pi(a) through the softmax, plus the entropy term
                // dH/ds_i = -p_i (log p_i + H).
                score_grad[i] = g_logp * (ind - probs[i]);
                if (probs[i] > 0.0)
                    score_grad[i] += entropy_coef * inv_n * probs[i] *
                                     (std::log(probs[i]) + entropy);
            }
            const double g_value =
                config.value_coef * 2.0 * value_err * inv_n;
            backward(params, tr.obs, trace, score_grad, g_value, *grads);
        }
    }

    diag.loss = config.policy_coef * diag.policy_loss +
                config.value_coef * diag.value_loss -
                entropy_coef * diag.entropy;
    return diag;
}

namespace {

void adam_apply(PolicyParams& params, AdamState& opt, const PolicyParams& grads,
                double lr) {
    opt.step += 1;
    const double bias1 = 1.0 / (1.0 - std::pow(kAdamBeta1, opt.step));
    const double bias2 = 1.0 / (1.0 - std::pow(kAdamBeta2, opt.step));
    const auto& ops = kernels::active_ops();
    ops.adam_step(params.flat().data(), opt.m.data(), opt.v.data(),
                  grads.flat().data(), static_cast<int>(params.flat().size()),
                  lr, kAdamBeta1, kAdamBeta2, kAdamEps, bias1, bias2);
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

UpdateMetrics update(PolicyParams& params, AdamState& optimizer,
                     const Rollout& rollout, const TrainConfig& config,
                     int iteration, Rng& rng) {
    const std::size_t n = rollout.transitions.size();
    if (n != static_cast<std::size_t>(config.rollout_length))
        throw InvalidConfig("rollout length does not match config");
    if (rollout.segment_starts.empty() ||
        rollout.segment_starts.size() != rollout.bootstrap_values.size())
        throw InvalidConfig("malformed rollout segmentation");

    // GAE per environment segment.
    std::vector<double> advantages(n), returns(n), old_log_probs(n);
    for (std::size_t s = 0; s < rollout.segment_starts.size(); ++s) {
        const std::size_t start = rollout.segment_starts[s];
        const std::size_t end = s + 1 < rollout.segment_starts.size()
                                    ? rollout.segment_starts[s + 1]
                                    : n;
        std::vector<double> rewards, values;
        rewards.reserve(end - start);
        values.reserve(end - start);
        for (std::size_t t = start; t < end; ++t) {
            rewards.push_back(rollout.transitions[t].reward);
            values.push_back(rollout.transitions[t].value);
        }
        const GaeResult gae =
            compute_gae(rewards, values, rollout.bootstrap_values[s],
                        config.gamma, config.lambda);
        std::copy(gae.advantages.begin(), gae.advantages.end(),
                  advantages.begin() + start);
        std::copy(gae.returns.begin(), gae.returns.end(),
                  returns.begin() + start);
    }
    for (std::size_t t = 0; t < n; ++t)
        old_log_probs[t] = rollout.transitions[t].log_prob;

    // Normalize advantages across the whole update batch.
    normalize_advantages(advantages);

    const double entropy_coef = config.entropy_coef_at(iteration);

    UpdateMetrics metrics;
    metrics.update_index = iteration;
    metrics.entropy_coef = entropy_coef;
    double reward_sum = 0.0;
    for (const Transition& tr : rollout.transitions) reward_sum += tr.reward;
    metrics.mean_reward = reward_sum / static_cast<double>(n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<Transition> batch;
    std::vector<double> b_logp, b_adv, b_ret;
    PolicyParams grads;
    double diag_weight = 0.0;

    for (int epoch = 0; epoch < config.epochs_per_update; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t at = 0; at < n;
             at += static_cast<std::size_t>(config.minibatch_size)) {
            const std::size_t take = std::min(
                static_cast<std::size_t>(config.minibatch_size), n - at);
            batch.clear();
            b_logp.clear();
            b_adv.clear();
            b_ret.clear();
            for (std::size_t k = 0; k < take; ++k) {
                const std::size_t idx = order[at + k];
                batch.push_back(rollout.transitions[idx]);
                b_logp.push_back(old_log_probs[idx]);
                b_adv.push_back(advantages[idx]);
                b_ret.push_back(returns[idx]);
            }
            grads.fill(0.0);
            const LossDiagnostics diag =
                ppo_loss(params, batch, b_logp, b_adv, b_ret, config,
                         entropy_coef, &grads);
            if (!all_finite(grads.flat()) || !std::isfinite(diag.loss))
                throw NumericalError("non-finite gradient in PPO update");
            adam_apply(params, optimizer, grads, config.learning_rate);
            metrics.entropy += diag.entropy;
            metrics.value_loss += diag.value_loss;
            metrics.policy_loss += diag.policy_loss;
            diag_weight += 1.0;
        }
    }
    metrics.entropy /= diag_weight;
    metrics.value_loss /= diag_weight;
    metrics.policy_loss /= diag_weight;
    return metrics;
}

std::string format_metrics_row(const UpdateMetrics& m) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%d,%lld,%.9g,%.9g,%.9g,%.9g,%.9g",
                  m.update_index, static_cast<long long>(m.env_steps),
                  m.mean_reward, m.entropy, m.value_loss, m.policy_loss,
                  m.entropy_coef);
    return buf;
}

TrainResult train(const std::function<Environment(int)>& make_env,
                  const TrainConfig& config, std::uint64_t seed,
                  const std::filesystem::path& metrics_csv,
                  const TrainHooks& hooks) {
    config.validate();

    std::vector<Environment> envs;
    envs.reserve(config.n_envs);
    for (int e = 0; e < config.n_envs; ++e) {
        envs.push_back(make_env(e));
        envs.back().reset();
    }

    TrainResult result{PolicyParams::random_init(seed), {}};
    AdamState optimizer;
    Rng sample_rng = make_rng(seed, 5);
    Rng shuffle_rng = make_rng(seed, 6);

    std::ofstream csv;
    if (!metrics_csv.empty()) {
        csv.open(metrics_csv, std::ios::trunc);
        if (!csv)
            throw InvalidConfig("cannot open metrics file: " +
                                metrics_csv.string());
        csv << "update_index,env_steps,mean_reward,entropy,value_loss,"
               "policy_loss,entropy_coef\n";
    }

    const int per_env = config.rollout_length / config.n_envs;
    ForwardTrace trace;
    std::int64_t env_steps = 0;

    for (int iter = 0; iter < config.total_iterations; ++iter) {
        Rollout rollout;
        rollout.transitions.reserve(config.rollout_length);
        for (int e = 0; e < config.n_envs; ++e) {
            rollout.segment_starts.push_back(rollout.transitions.size());
            auto segment =
                collect_rollout(envs[e], result.params, per_env, sample_rng);
            for (auto& tr : segment)
                rollout.transitions.push_back(std::move(tr));
            const Observation next_obs = envs[e].observe();
            rollout.bootstrap_values.push_back(
                forward(result.params, next_obs, trace).value);
        }
        env_steps += config.rollout_length;

        UpdateMetrics metrics = update(result.params, optimizer, rollout,
                                       config, iter, shuffle_rng);
        metrics.env_steps = env_steps;
        if (csv.is_open()) csv << format_metrics_row(metrics) << '\n';
        result.history.push_back(metrics);
        if (hooks.on_update && !hooks.on_update(result.params, metrics)) break;
    }
    if (csv.is_open()) csv.flush();
    return result;
}

}  // namespace mrta
