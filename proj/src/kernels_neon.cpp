#include "mrta/kernels.hpp"

// NEON variants, 2 doubles per lane. aarch64 only (f64 NEON arithmetic is
// baseline there, no extra compile flags or runtime probe needed).

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace mrta::kernels {
namespace {

void affine_neon(double* y, const double* w, const double* x, const double* b,
                 int rows, int cols) {
    const int body = cols & ~1;
    for (int r = 0; r < rows; ++r) {
        const double* row = w + static_cast<std::size_t>(r) * cols;
        float64x2_t acc = vdupq_n_f64(0.0);
        for (int c = 0; c < body; c += 2)
            acc = vfmaq_f64(acc, vld1q_f64(row + c), vld1q_f64(x + c));
        double sum = vaddvq_f64(acc);
        if (cols & 1) sum += row[cols - 1] * x[cols - 1];
        y[r] = sum + b[r];
    }
}

void matvec_t_neon(double* y, const double* w, const double* g, int rows,
                   int cols) {
    const int body = cols & ~1;
    for (int c = 0; c < cols; ++c) y[c] = 0.0;
    for (int r = 0; r < rows; ++r) {
        const double* row = w + static_cast<std::size_t>(r) * cols;
        const float64x2_t gr = vdupq_n_f64(g[r]);
        for (int c = 0; c < body; c += 2)
            vst1q_f64(y + c, vfmaq_f64(vld1q_f64(y + c), gr, vld1q_f64(row + c)));
        if (cols & 1) y[cols - 1] += g[r] * row[cols - 1];
    }
}

void ger_acc_neon(double* w, const double* g, const double* x, int rows,
                  int cols) {
    const int body = cols & ~1;
    for (int r = 0; r < rows; ++r) {
        double* row = w + static_cast<std::size_t>(r) * cols;
        const float64x2_t gr = vdupq_n_f64(g[r]);
        for (int c = 0; c < body; c += 2)
            vst1q_f64(row + c,
                      vfmaq_f64(vld1q_f64(row + c), gr, vld1q_f64(x + c)));
        if (cols & 1) row[cols - 1] += g[r] * x[cols - 1];
    }
}

void axpy_neon(double* y, double a, const double* x, int n) {
    const int body = n & ~1;
    const float64x2_t av = vdupq_n_f64(a);
    for (int i = 0; i < body; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
    if (n & 1) y[n - 1] += a * x[n - 1];
}

double dot_neon(const double* x, const double* y, int n) {
    const int body = n & ~1;
    float64x2_t acc = vdupq_n_f64(0.0);
    for (int i = 0; i < body; i += 2)
        acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
    double sum = vaddvq_f64(acc);
    if (n & 1) sum += x[n - 1] * y[n - 1];
    return sum;
}

void adam_step_neon(double* p, double* m, double* v, const double* g, int n,
                    double lr, double beta1, double beta2, double eps,
                    double bias1, double bias2) {
    const int body = n & ~1;
    const float64x2_t b1 = vdupq_n_f64(beta1);
    const float64x2_t b2 = vdupq_n_f64(beta2);
    const float64x2_t one_b1 = vdupq_n_f64(1.0 - beta1);
    const float64x2_t one_b2 = vdupq_n_f64(1.0 - beta2);
    const float64x2_t lrv = vdupq_n_f64(lr);
    const float64x2_t epsv = vdupq_n_f64(eps);
    const float64x2_t c1 = vdupq_n_f64(bias1);
    const float64x2_t c2 = vdupq_n_f64(bias2);
    for (int i = 0; i < body; i += 2) {
        const float64x2_t gi = vld1q_f64(g + i);
        float64x2_t mi = vfmaq_f64(vmulq_f64(one_b1, gi), b1, vld1q_f64(m + i));
        float64x2_t vi = vfmaq_f64(vmulq_f64(one_b2, vmulq_f64(gi, gi)), b2,
                                   vld1q_f64(v + i));
        vst1q_f64(m + i, mi);
        vst1q_f64(v + i, vi);
        const float64x2_t mhat = vmulq_f64(mi, c1);
        const float64x2_t denom =
            vaddq_f64(vsqrtq_f64(vmulq_f64(vi, c2)), epsv);
        const float64x2_t step = vdivq_f64(vmulq_f64(lrv, mhat), denom);
        vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), step));
    }
    for (int i = body; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] * bias1) / (std::sqrt(v[i] * bias2) + eps);
    }
}

}  // namespace

const Ops* neon_ops() {
    static const Ops ops{
        "neon",    affine_neon, matvec_t_neon, ger_acc_neon,
        axpy_neon, dot_neon,    adam_step_neon,
    };
    return &ops;
}

}  // namespace mrta::kernels

#endif  // aarch64
