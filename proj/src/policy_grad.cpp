#include <cstring>
#include <vector>

#include "mrta/error.hpp"
#include "mrta/kernels.hpp"
#include "mrta/policy.hpp"

// Reverse-mode pass through the allocation network. The graph is twelve
// small affine maps, so the adjoints are written out explicitly; the
// finite-difference suite pins this code against the loss it differentiates.

namespace mrta {

namespace {

// Weight handles for one entity branch (robot or task encoder + its
// attention scalar), plus the matching gradient accumulators.
struct Branch {
    const double* w2;
    const double* w3;
    const double* w4;
    double* gw1;
    double* gb1;
    double* gw2;
    double* gb2;
    double* gw3;
    double* gb3;
    double* gw4;
    double* gb4;
};

Branch robot_branch(const PolicyParams& p, PolicyParams& g) {
    return {p.tensor(kWR2), p.tensor(kWR3), p.tensor(kWR4),
            g.tensor(kWR1), g.tensor(kBR1), g.tensor(kWR2), g.tensor(kBR2),
            g.tensor(kWR3), g.tensor(kBR3), g.tensor(kWR4), g.tensor(kBR4)};
}

Branch task_branch(const PolicyParams& p, PolicyParams& g) {
    return {p.tensor(kWP2), p.tensor(kWP3), p.tensor(kWP4),
            g.tensor(kWP1), g.tensor(kBP1), g.tensor(kWP2), g.tensor(kBP2),
            g.tensor(kWP3), g.tensor(kBP3), g.tensor(kWP4), g.tensor(kBP4)};
}

// Adjoint of one entity: takes the embedding gradient accumulated from the
// pooled sums / heads plus the attention-scalar gradient, finishes the
// attention sub-branch (which feeds back into the embedding gradient) and
// then the encoder. `g_embed` is clobbered.
void backward_entity(const kernels::Ops& ops, const Branch& br,
                     const double* features, int feat_dim, const double* pre,
                     const double* hidden, const double* embed,
                     const double* attn_tanh, double alpha, double g_alpha,
                     double* g_embed) {
    if (g_alpha != 0.0) {
        const double g_q = g_alpha * alpha * (1.0 - alpha);
        ops.axpy(br.gw4, g_q, attn_tanh, kAttnHidden);
        br.gb4[0] += g_q;
        double g_apre[kAttnHidden];
        ops.matvec_t(g_apre, br.w4, &g_q, 1, kAttnHidden);
        for (int i = 0; i < kAttnHidden; ++i)
            g_apre[i] *= 1.0 - attn_tanh[i] * attn_tanh[i];
        ops.ger_acc(br.gw3, g_apre, embed, kAttnHidden, kEmbed);
        for (int i = 0; i < kAttnHidden; ++i) br.gb3[i] += g_apre[i];
        double g_from_attn[kEmbed];
        ops.matvec_t(g_from_attn, br.w3, g_apre, kAttnHidden, kEmbed);
        for (int i = 0; i < kEmbed; ++i) g_embed[i] += g_from_attn[i];
    }

    ops.ger_acc(br.gw2, g_embed, hidden, kEmbed, kEmbed);
    for (int i = 0; i < kEmbed; ++i) br.gb2[i] += g_embed[i];
    double g_hidden[kEmbed];
    ops.matvec_t(g_hidden, br.w2, g_embed, kEmbed, kEmbed);
    for (int i = 0; i < kEmbed; ++i)
        if (pre[i] <= 0.0) g_hidden[i] = 0.0;
    ops.ger_acc(br.gw1, g_hidden, features, kEmbed, feat_dim);
    for (int i = 0; i < kEmbed; ++i) br.gb1[i] += g_hidden[i];
}

}  // namespace

void backward(const PolicyParams& params, const Observation& obs,
              const ForwardTrace& trace, std::span<const double> score_grad,
              double value_grad, PolicyParams& grads) {
    const int n_robots = trace.n_robots;
    const int n_tasks = trace.n_tasks;
    if (static_cast<int>(score_grad.size()) != n_tasks)
        throw NumericalError("score gradient length does not match trace");

    const auto& ops = kernels::active_ops();

    // Per-entity embedding gradients, reused across calls.
    static thread_local std::vector<double> g_robot_embed;
    static thread_local std::vector<double> g_task_embed;
    g_robot_embed.assign(static_cast<std::size_t>(n_robots) * kEmbed, 0.0);
    g_task_embed.assign(static_cast<std::size_t>(n_tasks) * kEmbed, 0.0);

    double g_global[kGlobal] = {0.0};

    // Value head: value = w_v2 . tanh(w_v1 V + b_v1) + b_v2.
    if (value_grad != 0.0) {
        ops.axpy(grads.tensor(kWV2), value_grad, trace.value_tanh.data(),
                 kValueHidden);
        grads.tensor(kBV2)[0] += value_grad;
        double g_vpre[kValueHidden];
        ops.matvec_t(g_vpre, params.tensor(kWV2), &value_grad, 1,
                     kValueHidden);
        for (int i = 0; i < kValueHidden; ++i)
            g_vpre[i] *= 1.0 - trace.value_tanh[i] * trace.value_tanh[i];
        ops.ger_acc(grads.tensor(kWV1), g_vpre, trace.global.data(),
                    kValueHidden, kGlobal);
        for (int i = 0; i < kValueHidden; ++i)
            grads.tensor(kBV1)[i] += g_vpre[i];
        double g_v_global[kGlobal];
        ops.matvec_t(g_v_global, params.tensor(kWV1), g_vpre, kValueHidden,
                     kGlobal);
        for (int i = 0; i < kGlobal; ++i) g_global[i] += g_v_global[i];
    }

    // Score head per task: s_i = w_2 . relu(w_1 [V | E_i] + b_1) + b_2.
    double head_in[kHeadIn];
    std::memcpy(head_in, trace.global.data(), kGlobal * sizeof(double));
    for (int i = 0; i < n_tasks; ++i) {
        const double g_s = score_grad[i];
        if (g_s == 0.0) continue;
        const double* hid_row =
            trace.head_hidden.data() + static_cast<std::size_t>(i) * kHeadHidden;
        const double* pre_row =
            trace.head_pre.data() + static_cast<std::size_t>(i) * kHeadHidden;
        ops.axpy(grads.tensor(kW2), g_s, hid_row, kHeadHidden);
        grads.tensor(kB2)[0] += g_s;
        double g_hpre[kHeadHidden];
        ops.matvec_t(g_hpre, params.tensor(kW2), &g_s, 1, kHeadHidden);
        for (int k = 0; k < kHeadHidden; ++k)
            if (pre_row[k] <= 0.0) g_hpre[k] = 0.0;
        std::memcpy(head_in + kGlobal,
                    trace.task_embed.data() + static_cast<std::size_t>(i) * kEmbed,
                    kEmbed * sizeof(double));
        ops.ger_acc(grads.tensor(kW1), g_hpre, head_in, kHeadHidden, kHeadIn);
        for (int k = 0; k < kHeadHidden; ++k) grads.tensor(kB1)[k] += g_hpre[k];
        double g_u[kHeadIn];
        ops.matvec_t(g_u, params.tensor(kW1), g_hpre, kHeadHidden, kHeadIn);
        for (int k = 0; k < kGlobal; ++k) g_global[k] += g_u[k];
        ops.axpy(g_task_embed.data() + static_cast<std::size_t>(i) * kEmbed,
                 1.0, g_u + kGlobal, kEmbed);
    }

    // Split the pooled-state gradient: V = [v_R | v_P | E_sel].
    const double* g_v_robot = g_global;
    const double* g_v_task = g_global + kEmbed;
    const double* g_e_sel = g_global + 2 * kEmbed;

    ops.axpy(g_robot_embed.data() +
                 static_cast<std::size_t>(trace.selected) * kEmbed,
             1.0, g_e_sel, kEmbed);

    // Pooling adjoints: v = sum alpha_e E_e.
    const Branch rbr = robot_branch(params, grads);
    for (int j = 0; j < n_robots; ++j) {
        const std::size_t off = static_cast<std::size_t>(j) * kEmbed;
        const double* embed = trace.robot_embed.data() + off;
        const double g_alpha = ops.dot(g_v_robot, embed, kEmbed);
        double* g_embed = g_robot_embed.data() + off;
        ops.axpy(g_embed, trace.robot_alpha[j], g_v_robot, kEmbed);
        backward_entity(ops, rbr, obs.robot_features[j].data(), kRobotFeat,
                        trace.robot_pre.data() + off,
                        trace.robot_hidden.data() + off, embed,
                        trace.robot_attn_tanh.data() + off,
                        trace.robot_alpha[j], g_alpha, g_embed);
    }
    const Branch tbr = task_branch(params, grads);
    for (int i = 0; i < n_tasks; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * kEmbed;
        const double* embed = trace.task_embed.data() + off;
        const double g_alpha = ops.dot(g_v_task, embed, kEmbed);
        double* g_embed = g_task_embed.data() + off;
        ops.axpy(g_embed, trace.task_alpha[i], g_v_task, kEmbed);
        backward_entity(ops, tbr, obs.task_features[i].data(), kTaskFeat,
                        trace.task_pre.data() + off,
                        trace.task_hidden.data() + off, embed,
                        trace.task_attn_tanh.data() + off,
                        trace.task_alpha[i], g_alpha, g_embed);
    }
}

}  // namespace mrta
