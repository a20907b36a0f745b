#include "mrta/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "mrta/error.hpp"
#include "mrta/kernels.hpp"

namespace mrta {

namespace {

constexpr std::array<TensorShape, kTensorCount> kManifest{{
    {"w_r1", kEmbed, kRobotFeat},
    {"b_r1", kEmbed, 1},
    {"w_r2", kEmbed, kEmbed},
    {"b_r2", kEmbed, 1},
    {"w_r3", kAttnHidden, kEmbed},
    {"b_r3", kAttnHidden, 1},
    {"w_r4", 1, kAttnHidden},
    {"b_r4", 1, 1},
    {"w_p1", kEmbed, kTaskFeat},
    {"b_p1", kEmbed, 1},
    {"w_p2", kEmbed, kEmbed},
    {"b_p2", kEmbed, 1},
    {"w_p3", kAttnHidden, kEmbed},
    {"b_p3", kAttnHidden, 1},
    {"w_p4", 1, kAttnHidden},
    {"b_p4", 1, 1},
    {"w_1", kHeadHidden, kHeadIn},
    {"b_1", kHeadHidden, 1},
    {"w_2", 1, kHeadHidden},
    {"b_2", 1, 1},
    {"w_v1", kValueHidden, kGlobal},
    {"b_v1", kValueHidden, 1},
    {"w_v2", 1, kValueHidden},
    {"b_v2", 1, 1},
}};

std::array<std::size_t, kTensorCount> compute_offsets() {
    std::array<std::size_t, kTensorCount> offsets{};
    std::size_t at = 0;
    for (int t = 0; t < kTensorCount; ++t) {
        offsets[t] = at;
        at += kManifest[t].size();
    }
    return offsets;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::array<std::size_t, kTensorCount> PolicyParams::offsets_ =
    compute_offsets();

const std::array<TensorShape, kTensorCount>& PolicyParams::manifest() {
    return kManifest;
}

std::size_t PolicyParams::total_size() {
    return offsets_[kTensorCount - 1] + kManifest[kTensorCount - 1].size();
}

PolicyParams::PolicyParams() : data_(total_size(), 0.0) {}

PolicyParams PolicyParams::random_init(std::uint64_t seed) {
    PolicyParams params;
    Rng rng = make_rng(seed, 4);
    for (int t = 0; t < kTensorCount; ++t) {
        const TensorShape& shape = kManifest[t];
        if (shape.cols == 1) continue;  // biases stay zero
        const float bound = 1.0f / std::sqrt(static_cast<float>(shape.cols));
        std::uniform_real_distribution<float> dist(-bound, bound);
        double* data = params.tensor(static_cast<Tensor>(t));
        for (int i = 0; i < shape.size(); ++i) data[i] = dist(rng);
    }
    return params;
}

void PolicyParams::fill(double value) {
    std::fill(data_.begin(), data_.end(), value);
}

void robot_embedding(const PolicyParams& params,
                     std::span<const double, kRobotFeat> features,
                     std::span<double, kEmbed> out) {
    const auto& ops = kernels::active_ops();
    double hidden[kEmbed];
    ops.affine(hidden, params.tensor(kWR1), features.data(),
               params.tensor(kBR1), kEmbed, kRobotFeat);
    for (double& h : hidden) h = std::max(0.0, h);
    ops.affine(out.data(), params.tensor(kWR2), hidden, params.tensor(kBR2),
               kEmbed, kEmbed);
}

void task_embedding(const PolicyParams& params,
                    std::span<const double, kTaskFeat> features,
                    std::span<double, kEmbed> out) {
    const auto& ops = kernels::active_ops();
    double hidden[kEmbed];
    ops.affine(hidden, params.tensor(kWP1), features.data(),
               params.tensor(kBP1), kEmbed, kTaskFeat);
    for (double& h : hidden) h = std::max(0.0, h);
    ops.affine(out.data(), params.tensor(kWP2), hidden, params.tensor(kBP2),
               kEmbed, kEmbed);
}

double attention_scalar(const PolicyParams& params,
                        std::span<const double, kEmbed> embedding,
                        EmbedKind kind) {
    const auto& ops = kernels::active_ops();
    const Tensor w3 = kind == EmbedKind::Robot ? kWR3 : kWP3;
    const Tensor b3 = kind == EmbedKind::Robot ? kBR3 : kBP3;
    const Tensor w4 = kind == EmbedKind::Robot ? kWR4 : kWP4;
    const Tensor b4 = kind == EmbedKind::Robot ? kBR4 : kBP4;
    double hidden[kAttnHidden];
    ops.affine(hidden, params.tensor(w3), embedding.data(), params.tensor(b3),
               kAttnHidden, kEmbed);
    for (double& h : hidden) h = std::tanh(h);
    double pre;
    ops.affine(&pre, params.tensor(w4), hidden, params.tensor(b4), 1,
               kAttnHidden);
    return sigmoid(pre);
}

namespace {

void resize_trace(ForwardTrace& trace, int n_robots, int n_tasks) {
    trace.n_robots = n_robots;
    trace.n_tasks = n_tasks;
    const std::size_t r16 = static_cast<std::size_t>(n_robots) * kEmbed;
    const std::size_t t16 = static_cast<std::size_t>(n_tasks) * kEmbed;
    trace.robot_pre.resize(r16);
    trace.robot_hidden.resize(r16);
    trace.robot_embed.resize(r16);
    trace.robot_attn_pre.resize(r16);
    trace.robot_attn_tanh.resize(r16);
    trace.robot_alpha.resize(n_robots);
    trace.task_pre.resize(t16);
    trace.task_hidden.resize(t16);
    trace.task_embed.resize(t16);
    trace.task_attn_pre.resize(t16);
    trace.task_attn_tanh.resize(t16);
    trace.task_alpha.resize(n_tasks);
    trace.head_pre.resize(static_cast<std::size_t>(n_tasks) * kHeadHidden);
    trace.head_hidden.resize(static_cast<std::size_t>(n_tasks) * kHeadHidden);
    trace.scores.resize(n_tasks);
    trace.probs.resize(n_tasks);
}

// Shared by the robot and task branches: encoder + attention scalar for one
// entity, writing all intermediates at row `row` of the branch buffers.
void encode_entity(const kernels::Ops& ops, const double* w1, const double* b1,
                   const double* w2, const double* b2, const double* w3,
                   const double* b3, const double* w4, const double* b4,
                   const double* features, int feat_dim, int row,
                   std::vector<double>& pre, std::vector<double>& hidden,
                   std::vector<double>& embed, std::vector<double>& attn_pre,
                   std::vector<double>& attn_tanh, std::vector<double>& alpha) {
    double* pre_row = pre.data() + static_cast<std::size_t>(row) * kEmbed;
    double* hid_row = hidden.data() + static_cast<std::size_t>(row) * kEmbed;
    double* emb_row = embed.data() + static_cast<std::size_t>(row) * kEmbed;
    double* apre_row =
        attn_pre.data() + static_cast<std::size_t>(row) * kAttnHidden;
    double* attn_tanh_row =
        attn_tanh.data() + static_cast<std::size_t>(row) * kAttnHidden;

    ops.affine(pre_row, w1, features, b1, kEmbed, feat_dim);
    for (int i = 0; i < kEmbed; ++i) hid_row[i] = std::max(0.0, pre_row[i]);
    ops.affine(emb_row, w2, hid_row, b2, kEmbed, kEmbed);

    ops.affine(apre_row, w3, emb_row, b3, kAttnHidden, kEmbed);
    for (int i = 0; i < kAttnHidden; ++i) attn_tanh_row[i] = std::tanh(apre_row[i]);
    double scalar_pre;
    ops.affine(&scalar_pre, w4, attn_tanh_row, b4, 1, kAttnHidden);
    alpha[row] = sigmoid(scalar_pre);
}

}  // namespace

ForwardResult forward(const PolicyParams& params, const Observation& obs,
                      ForwardTrace& trace) {
    const int n_robots = obs.n_robots();
    const int n_tasks = obs.n_tasks();
    if (n_robots < 1 || n_tasks < 1)
        throw InvalidConfig("forward needs at least one robot and one task");
    if (obs.selected < 0 || obs.selected >= n_robots)
        throw InvalidConfig("selected robot index out of range");

    const auto& ops = kernels::active_ops();
    resize_trace(trace, n_robots, n_tasks);
    trace.selected = obs.selected;

    for (int j = 0; j < n_robots; ++j) {
        encode_entity(ops, params.tensor(kWR1), params.tensor(kBR1),
                      params.tensor(kWR2), params.tensor(kBR2),
                      params.tensor(kWR3), params.tensor(kBR3),
                      params.tensor(kWR4), params.tensor(kBR4),
                      obs.robot_features[j].data(), kRobotFeat, j,
                      trace.robot_pre, trace.robot_hidden, trace.robot_embed,
                      trace.robot_attn_pre, trace.robot_attn_tanh,
                      trace.robot_alpha);
    }
    for (int i = 0; i < n_tasks; ++i) {
        encode_entity(ops, params.tensor(kWP1), params.tensor(kBP1),
                      params.tensor(kWP2), params.tensor(kBP2),
                      params.tensor(kWP3), params.tensor(kBP3),
                      params.tensor(kWP4), params.tensor(kBP4),
                      obs.task_features[i].data(), kTaskFeat, i,
                      trace.task_pre, trace.task_hidden, trace.task_embed,
                      trace.task_attn_pre, trace.task_attn_tanh,
                      trace.task_alpha);
    }

    // Pooled state V = [sum_j a_j E_j | sum_i a_i E_i | E_sel].
    double* v_robot = trace.global.data();
    double* v_task = trace.global.data() + kEmbed;
    double* e_sel = trace.global.data() + 2 * kEmbed;
    std::fill(trace.global.begin(), trace.global.end(), 0.0);
    for (int j = 0; j < n_robots; ++j)
        ops.axpy(v_robot, trace.robot_alpha[j],
                 trace.robot_embed.data() + static_cast<std::size_t>(j) * kEmbed,
                 kEmbed);
    for (int i = 0; i < n_tasks; ++i)
        ops.axpy(v_task, trace.task_alpha[i],
                 trace.task_embed.data() + static_cast<std::size_t>(i) * kEmbed,
                 kEmbed);
    std::memcpy(e_sel,
                trace.robot_embed.data() +
                    static_cast<std::size_t>(obs.selected) * kEmbed,
                kEmbed * sizeof(double));

    // Per-task score head over [V | E_i].
    double head_in[kHeadIn];
    std::memcpy(head_in, trace.global.data(), kGlobal * sizeof(double));
    for (int i = 0; i < n_tasks; ++i) {
        std::memcpy(head_in + kGlobal,
                    trace.task_embed.data() + static_cast<std::size_t>(i) * kEmbed,
                    kEmbed * sizeof(double));
        double* pre_row =
            trace.head_pre.data() + static_cast<std::size_t>(i) * kHeadHidden;
        double* hid_row =
            trace.head_hidden.data() + static_cast<std::size_t>(i) * kHeadHidden;
        ops.affine(pre_row, params.tensor(kW1), head_in, params.tensor(kB1),
                   kHeadHidden, kHeadIn);
        for (int k = 0; k < kHeadHidden; ++k)
            hid_row[k] = std::max(0.0, pre_row[k]);
        ops.affine(&trace.scores[i], params.tensor(kW2), hid_row,
                   params.tensor(kB2), 1, kHeadHidden);
    }

    // Softmax with the usual max-shift for stability.
    const double shift =
        *std::max_element(trace.scores.begin(), trace.scores.end());
    double norm = 0.0;
    for (int i = 0; i < n_tasks; ++i) {
        trace.probs[i] = std::exp(trace.scores[i] - shift);
        norm += trace.probs[i];
    }
    for (int i = 0; i < n_tasks; ++i) trace.probs[i] /= norm;

    // Value head over V.
    ops.affine(trace.value_pre.data(), params.tensor(kWV1), trace.global.data(),
               params.tensor(kBV1), kValueHidden, kGlobal);
    for (int k = 0; k < kValueHidden; ++k)
        trace.value_tanh[k] = std::tanh(trace.value_pre[k]);
    ops.affine(&trace.value, params.tensor(kWV2), trace.value_tanh.data(),
               params.tensor(kBV2), 1, kValueHidden);

    ForwardResult result;
    result.dist.logits = trace.scores;
    result.dist.probabilities = trace.probs;
    result.value = trace.value;
    return result;
}

GlobalState global_state(const PolicyParams& params, const Observation& obs) {
    ForwardTrace trace;
    forward(params, obs, trace);
    GlobalState state;
    state.v = trace.global;
    state.task_embeddings.resize(obs.n_tasks());
    for (int i = 0; i < obs.n_tasks(); ++i)
        std::memcpy(state.task_embeddings[i].data(),
                    trace.task_embed.data() + static_cast<std::size_t>(i) * kEmbed,
                    kEmbed * sizeof(double));
    return state;
}

int select_action(const ActionDistribution& dist, SelectMode mode, Rng* rng) {
    const auto& p = dist.probabilities;
    if (p.empty()) throw InvalidAction("empty action distribution");
    if (mode == SelectMode::Argmax) {
        int best = 0;
        for (int i = 1; i < static_cast<int>(p.size()); ++i)
            if (p[i] > p[best]) best = i;
        return best;
    }
    if (rng == nullptr)
        throw InvalidConfig("sampling requires a random generator");
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double u = uniform(*rng);
    double cumulative = 0.0;
    for (int i = 0; i < static_cast<int>(p.size()); ++i) {
        cumulative += p[i];
        if (u < cumulative) return i;
    }
    return static_cast<int>(p.size()) - 1;
}

int mpdm(const Observation& obs) {
    if (obs.pickup_cost.empty()) throw InvalidAction("no queued task");
    int best = 0;
    for (int i = 1; i < static_cast<int>(obs.pickup_cost.size()); ++i)
        if (obs.pickup_cost[i] < obs.pickup_cost[best]) best = i;
    return best;
}

int rbts(const Observation& obs, std::span<const RobotState> robots,
         const CostProvider& provider) {
    if (obs.pickup_cost.empty()) throw InvalidAction("no queued task");
    if (robots.size() < 2) return mpdm(obs);

    int best = -1;
    double best_regret = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(obs.task_origins.size()); ++i) {
        double closest_other = std::numeric_limits<double>::infinity();
        for (int j = 0; j < static_cast<int>(robots.size()); ++j) {
            if (j == obs.selected) continue;
            double c;
            try {
                c = provider.cost(robots[j].position, obs.task_origins[i]);
            } catch (const Unreachable&) {
                c = obs.diagonal;
            }
            closest_other = std::min(closest_other, c);
        }
        const double regret = closest_other - obs.pickup_cost[i];
        if (regret > best_regret) {
            best_regret = regret;
            best = i;
        }
    }
    return best;
}

}  // namespace mrta
