#include "mrta/kernels.hpp"

// AVX2+FMA variants, 4 doubles per lane. This TU is compiled with
// -mavx2 -mfma on x86-64 only; dispatch guards execution behind a cpuid
// check so the library still runs on pre-AVX2 hardware.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace mrta::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

void affine_avx2(double* y, const double* w, const double* x, const double* b,
                 int rows, int cols) {
    const int tail = cols & 3;
    const int body = cols - tail;
    for (int r = 0; r < rows; ++r) {
        const double* row = w + static_cast<std::size_t>(r) * cols;
        __m256d acc = _mm256_setzero_pd();
        for (int c = 0; c < body; c += 4) {
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + c),
                                  _mm256_loadu_pd(x + c), acc);
        }
        double sum = hsum(acc);
        for (int c = body; c < cols; ++c) sum += row[c] * x[c];
        y[r] = sum + b[r];
    }
}

void matvec_t_avx2(double* y, const double* w, const double* g, int rows,
                   int cols) {
    const int tail = cols & 3;
    const int body = cols - tail;
    for (int c = 0; c < cols; ++c) y[c] = 0.0;
    for (int r = 0; r < rows; ++r) {
        const double* row = w + static_cast<std::size_t>(r) * cols;
        const __m256d gr = _mm256_set1_pd(g[r]);
        for (int c = 0; c < body; c += 4) {
            __m256d acc = _mm256_fmadd_pd(gr, _mm256_loadu_pd(row + c),
                                          _mm256_loadu_pd(y + c));
            _mm256_storeu_pd(y + c, acc);
        }
        for (int c = body; c < cols; ++c) y[c] += g[r] * row[c];
    }
}

void ger_acc_avx2(double* w, const double* g, const double* x, int rows,
                  int cols) {
    const int tail = cols & 3;
    const int body = cols - tail;
    for (int r = 0; r < rows; ++r) {
        double* row = w + static_cast<std::size_t>(r) * cols;
        const __m256d gr = _mm256_set1_pd(g[r]);
        for (int c = 0; c < body; c += 4) {
            __m256d acc = _mm256_fmadd_pd(gr, _mm256_loadu_pd(x + c),
                                          _mm256_loadu_pd(row + c));
            _mm256_storeu_pd(row + c, acc);
        }
        for (int c = body; c < cols; ++c) row[c] += g[r] * x[c];
    }
}

void axpy_avx2(double* y, double a, const double* x, int n) {
    const int body = n & ~3;
    const __m256d av = _mm256_set1_pd(a);
    for (int i = 0; i < body; i += 4) {
        __m256d acc = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                      _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, acc);
    }
    for (int i = body; i < n; ++i) y[i] += a * x[i];
}

double dot_avx2(const double* x, const double* y, int n) {
    const int body = n & ~3;
    __m256d acc = _mm256_setzero_pd();
    for (int i = 0; i < body; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                              acc);
    }
    double sum = hsum(acc);
    for (int i = body; i < n; ++i) sum += x[i] * y[i];
    return sum;
}

void adam_step_avx2(double* p, double* m, double* v, const double* g, int n,
                    double lr, double beta1, double beta2, double eps,
                    double bias1, double bias2) {
    const int body = n & ~3;
    const __m256d b1 = _mm256_set1_pd(beta1);
    const __m256d b2 = _mm256_set1_pd(beta2);
    const __m256d one_b1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d one_b2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d lrv = _mm256_set1_pd(lr);
    const __m256d epsv = _mm256_set1_pd(eps);
    const __m256d c1 = _mm256_set1_pd(bias1);
    const __m256d c2 = _mm256_set1_pd(bias2);
    for (int i = 0; i < body; i += 4) {
        const __m256d gi = _mm256_loadu_pd(g + i);
        __m256d mi = _mm256_fmadd_pd(b1, _mm256_loadu_pd(m + i),
                                     _mm256_mul_pd(one_b1, gi));
        __m256d vi = _mm256_fmadd_pd(b2, _mm256_loadu_pd(v + i),
                                     _mm256_mul_pd(one_b2, _mm256_mul_pd(gi, gi)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d mhat = _mm256_mul_pd(mi, c1);
        const __m256d denom =
            _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vi, c2)), epsv);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(lrv, mhat), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    for (int i = body; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] * bias1) / (std::sqrt(v[i] * bias2) + eps);
    }
}

}  // namespace

const Ops* avx2_ops_if_supported() {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma"))
        return nullptr;
    static const Ops ops{
        "avx2",    affine_avx2, matvec_t_avx2, ger_acc_avx2,
        axpy_avx2, dot_avx2,    adam_step_avx2,
    };
    return &ops;
}

}  // namespace mrta::kernels

#endif  // x86-64
