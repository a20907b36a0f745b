#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mrta/env.hpp"
#include "mrta/rng.hpp"

namespace mrta {

// Network dimensions. Fixed regardless of robot/task counts: per-entity
// encoders feed attention-weighted pooled embeddings, so the parameter set
// is constant in space while the forward pass is linear in both counts.
inline constexpr int kRobotFeat = 3;       // x, y, remaining
inline constexpr int kTaskFeat = 6;        // ox, oy, dx, dy, k, l
inline constexpr int kEmbed = 16;
inline constexpr int kAttnHidden = 16;
inline constexpr int kHeadHidden = 8;
inline constexpr int kValueHidden = 16;
inline constexpr int kGlobal = 3 * kEmbed;     // [v_R | v_P | E_sel]
inline constexpr int kHeadIn = kGlobal + kEmbed;

enum Tensor : int {
    kWR1, kBR1, kWR2, kBR2,   // robot encoder
    kWR3, kBR3, kWR4, kBR4,   // robot attention scalar
    kWP1, kBP1, kWP2, kBP2,   // task encoder
    kWP3, kBP3, kWP4, kBP4,   // task attention scalar
    kW1, kB1, kW2, kB2,       // per-task score head
    kWV1, kBV1, kWV2, kBV2,   // value head
    kTensorCount
};

struct TensorShape {
    const char* name;
    int rows;
    int cols;
    int size() const { return rows * cols; }
};

// All weights of the allocation policy and its value head in one flat
// buffer. Doubles in memory; checkpoints store the float32 image.
class PolicyParams {
public:
    PolicyParams();  // zero-initialized

    // Uniform +-1/sqrt(fan_in) weights (biases zero), drawn on the float32
    // grid so a fresh parameter set survives a checkpoint round trip
    // bit-for-bit.
    static PolicyParams random_init(std::uint64_t seed);

    static const std::array<TensorShape, kTensorCount>& manifest();
    static std::size_t total_size();

    double* tensor(Tensor t) { return data_.data() + offsets_[t]; }
    const double* tensor(Tensor t) const { return data_.data() + offsets_[t]; }
    static const TensorShape& shape(Tensor t) { return manifest()[t]; }

    std::vector<double>& flat() { return data_; }
    const std::vector<double>& flat() const { return data_; }

    void fill(double value);
    bool operator==(const PolicyParams& other) const {
        return data_ == other.data_;
    }

private:
    static std::array<std::size_t, kTensorCount> offsets_;
    std::vector<double> data_;
};

struct ActionDistribution {
    std::vector<double> probabilities;
    std::vector<double> logits;
};

// Intermediate activations of one forward pass, kept for the backward pass
// and reused across calls to avoid reallocation.
struct ForwardTrace {
    int n_robots = 0;
    int n_tasks = 0;
    int selected = 0;
    // robot branch, [n_robots x 16] unless noted
    std::vector<double> robot_pre;        // W_R1 f + b_R1
    std::vector<double> robot_hidden;     // relu of the above
    std::vector<double> robot_embed;      // E_j
    std::vector<double> robot_attn_pre;   // W_R3 E + b_R3
    std::vector<double> robot_attn_tanh;
    std::vector<double> robot_alpha;      // [n_robots]
    // task branch, same layout
    std::vector<double> task_pre;
    std::vector<double> task_hidden;
    std::vector<double> task_embed;
    std::vector<double> task_attn_pre;
    std::vector<double> task_attn_tanh;
    std::vector<double> task_alpha;
    // pooled state and heads
    std::array<double, kGlobal> global{};   // [v_R | v_P | E_sel]
    std::vector<double> head_pre;           // [n_tasks x 8]
    std::vector<double> head_hidden;        // relu
    std::vector<double> scores;             // [n_tasks]
    std::vector<double> probs;
    std::array<double, kValueHidden> value_pre{};
    std::array<double, kValueHidden> value_tanh{};
    double value = 0.0;
};

struct ForwardResult {
    ActionDistribution dist;
    double value = 0.0;
};

// Full policy evaluation: per-task categorical distribution plus the state
// value. The selected robot's embedding is the row obs.selected of the robot
// branch.
ForwardResult forward(const PolicyParams& params, const Observation& obs,
                      ForwardTrace& trace);

// Accumulates d(loss)/d(params) into `grads` given upstream gradients on the
// task scores and on the value output. `trace` must come from forward() with
// the same params and observation.
void backward(const PolicyParams& params, const Observation& obs,
              const ForwardTrace& trace, std::span<const double> score_grad,
              double value_grad, PolicyParams& grads);

// Building blocks of the forward pass, exposed for direct testing.
void robot_embedding(const PolicyParams& params,
                     std::span<const double, kRobotFeat> features,
                     std::span<double, kEmbed> out);
void task_embedding(const PolicyParams& params,
                    std::span<const double, kTaskFeat> features,
                    std::span<double, kEmbed> out);

enum class EmbedKind { Robot, Task };
double attention_scalar(const PolicyParams& params,
                        std::span<const double, kEmbed> embedding,
                        EmbedKind kind);

struct GlobalState {
    std::array<double, kGlobal> v{};
    std::vector<std::array<double, kEmbed>> task_embeddings;
};
GlobalState global_state(const PolicyParams& params, const Observation& obs);

enum class SelectMode { Sample, Argmax };

// Argmax breaks ties toward the lowest index; sampling consumes one draw
// from `rng`.
int select_action(const ActionDistribution& dist, SelectMode mode, Rng* rng);

// Myopic pickup-distance minimization: nearest task origin, lowest index on
// ties.
int mpdm(const Observation& obs);

// Regret-based task selection: for each task, the closest *other* robot's
// pickup cost minus the selected robot's; picks the maximal regret (lowest
// index on ties). Falls back to mpdm when there is no other robot.
int rbts(const Observation& obs, std::span<const RobotState> robots,
         const CostProvider& provider);

}  // namespace mrta
