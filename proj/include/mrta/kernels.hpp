#pragma once

#include <cstddef>
#include <vector>

namespace mrta::kernels {

// Dense double-precision primitives behind the policy forward/backward pass
// and the optimizer. Each op has a scalar reference implementation plus SIMD
// variants (AVX2 on x86-64, NEON on aarch64) selected once at startup.
// Matrices are row-major. SIMD variants may reassociate sums and use FMA, so
// results can differ from the scalar reference in the last bits; the
// equivalence tests bound that difference.
struct Ops {
    const char* name;

    // y = W x + b; W is [rows x cols], x has cols entries, y/b have rows.
    void (*affine)(double* y, const double* w, const double* x, const double* b,
                   int rows, int cols);

    // y = W^T g; g has rows entries, y has cols entries (overwritten).
    void (*matvec_t)(double* y, const double* w, const double* g, int rows,
                     int cols);

    // W += g x^T (rank-1 accumulate); g has rows entries, x has cols.
    void (*ger_acc)(double* w, const double* g, const double* x, int rows,
                    int cols);

    // y += a * x
    void (*axpy)(double* y, double a, const double* x, int n);

    double (*dot)(const double* x, const double* y, int n);

    // Bias-corrected Adam element update:
    //   m = beta1*m + (1-beta1)*g
    //   v = beta2*v + (1-beta2)*g^2
    //   p -= lr * (m*bias1) / (sqrt(v*bias2) + eps)
    // with bias1 = 1/(1-beta1^t), bias2 = 1/(1-beta2^t) precomputed.
    void (*adam_step)(double* p, double* m, double* v, const double* g, int n,
                      double lr, double beta1, double beta2, double eps,
                      double bias1, double bias2);
};

const Ops& scalar_ops();

// Variants compiled into this build; first entry is always the scalar
// reference. SIMD entries appear only when the host can execute them.
std::vector<const Ops*> available_ops();

// The implementation picked for this process: the widest supported variant,
// overridable with MRTA_KERNELS=scalar|avx2|neon. Resolved once.
const Ops& active_ops();

}  // namespace mrta::kernels
