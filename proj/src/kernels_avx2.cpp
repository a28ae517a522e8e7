// AVX2 backend. This translation unit is the only one compiled with -mavx2;
// callers must go through avx2_ops(), which is null on CPUs without AVX2.

#include "aoisim/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace aoisim::kernels {
namespace {

inline double hsum4(__m256d v) {
    double lane[4];
    _mm256_storeu_pd(lane, v);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
    }
    double sum = hsum4(acc);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void matvec_avx2(const double* m, const double* x, double* y, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i) y[i] = dot_avx2(m + i * d, x, d);
}

double quad_form_avx2(const double* m, const double* x, std::size_t d) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += x[i] * dot_avx2(m + i * d, x, d);
    return acc;
}

void rank1_sym_avx2(double* m, const double* x, double scale, std::size_t d) {
    const std::size_t d4 = d & ~std::size_t{3};
    for (std::size_t i = 0; i < d; ++i) {
        const double s = scale * x[i];
        double* row = m + i * d;
        __m256d vs = _mm256_set1_pd(s);
        std::size_t j = 0;
        for (; j < d4; j += 4) {
            __m256d vx = _mm256_loadu_pd(x + j);
            __m256d vr = _mm256_loadu_pd(row + j);
            _mm256_storeu_pd(row + j, _mm256_add_pd(vr, _mm256_mul_pd(vs, vx)));
        }
        for (; j < d; ++j) row[j] += s * x[j];
    }
}

void axpy_avx2(double* y, double a, const double* x, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const Ops* avx2_ops_impl() {
    static const Ops ops{"avx2", dot_avx2, matvec_avx2, quad_form_avx2,
                         rank1_sym_avx2, axpy_avx2};
    return &ops;
}

}  // namespace aoisim::kernels

#endif  // __AVX2__
