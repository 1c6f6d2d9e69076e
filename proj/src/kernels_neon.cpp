// NEON kernel variants for aarch64, where NEON is architecturally baseline.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cassert>
#include <cmath>

#include "trace/kernels.hpp"

namespace trace::kernels {

double dot_neon(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    const std::size_t n = a.size();
    const std::size_t n2 = n & ~std::size_t{1};
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i < n2; i += 2) {
        acc = vfmaq_f64(acc, vld1q_f64(a.data() + i), vld1q_f64(b.data() + i));
    }
    double sum = vaddvq_f64(acc);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double l2_norm_neon(std::span<const double> v) {
    return std::sqrt(dot_neon(v, v));
}

void scale_in_place_neon(std::span<double> v, double factor) {
    const std::size_t n = v.size();
    const std::size_t n2 = n & ~std::size_t{1};
    const float64x2_t f = vdupq_n_f64(factor);
    std::size_t i = 0;
    for (; i < n2; i += 2) {
        vst1q_f64(v.data() + i, vmulq_f64(vld1q_f64(v.data() + i), f));
    }
    for (; i < n; ++i) v[i] *= factor;
}

}  // namespace trace::kernels

#endif  // aarch64
