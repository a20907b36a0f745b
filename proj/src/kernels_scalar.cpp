#include "mrta/kernels.hpp"

#include <cmath>

// Reference kernels. Plain loops, no reassociation: these define the
// semantics the SIMD variants are tested against.

namespace mrta::kernels {
namespace {

void affine_scalar(double* y, const double* w, const double* x, const double* b,
                   int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double* row = w + static_cast<std::size_t>(r) * cols;
        double acc = 0.0;
        for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc + b[r];
    }
}

void matvec_t_scalar(double* y, const double* w, const double* g, int rows,
                     int cols) {
    for (int c = 0; c < cols; ++c) y[c] = 0.0;
    for (int r = 0; r < rows; ++r) {
        const double* row = w + static_cast<std::size_t>(r) * cols;
        const double gr = g[r];
        for (int c = 0; c < cols; ++c) y[c] += gr * row[c];
    }
}

void ger_acc_scalar(double* w, const double* g, const double* x, int rows,
                    int cols) {
    for (int r = 0; r < rows; ++r) {
        double* row = w + static_cast<std::size_t>(r) * cols;
        const double gr = g[r];
        for (int c = 0; c < cols; ++c) row[c] += gr * x[c];
    }
}

void axpy_scalar(double* y, double a, const double* x, int n) {
    for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* x, const double* y, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void adam_step_scalar(double* p, double* m, double* v, const double* g, int n,
                      double lr, double beta1, double beta2, double eps,
                      double bias1, double bias2) {
    for (int i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] * bias1;
        const double vhat = v[i] * bias2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{
        "scalar",         affine_scalar, matvec_t_scalar, ger_acc_scalar,
        axpy_scalar, dot_scalar,    adam_step_scalar,
    };
    return ops;
}

}  // namespace mrta::kernels
