// AVX2 kernel variants. Compiled with -mavx2; only reachable after the
// runtime dispatcher has confirmed AVX2 support.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cassert>
#include <cmath>

#include "trace/kernels.hpp"

namespace trace::kernels {

namespace {

inline double hsum256(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

}  // namespace

double dot_avx2(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    const std::size_t n = a.size();
    const std::size_t n4 = n & ~std::size_t{3};
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        const __m256d va = _mm256_loadu_pd(a.data() + i);
        const __m256d vb = _mm256_loadu_pd(b.data() + i);
        acc = _mm256_fmadd_pd(va, vb, acc);
    }
    double sum = hsum256(acc);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double l2_norm_avx2(std::span<const double> v) {
    return std::sqrt(dot_avx2(v, v));
}

void scale_in_place_avx2(std::span<double> v, double factor) {
    const std::size_t n = v.size();
    const std::size_t n4 = n & ~std::size_t{3};
    const __m256d f = _mm256_set1_pd(factor);
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        _mm256_storeu_pd(v.data() + i,
                         _mm256_mul_pd(_mm256_loadu_pd(v.data() + i), f));
    }
    for (; i < n; ++i) v[i] *= factor;
}

}  // namespace trace::kernels

#endif  // x86_64
