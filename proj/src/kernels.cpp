#include "trace/kernels.hpp"

#include <cassert>
#include <cmath>

namespace trace::kernels {

double dot_scalar(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double l2_norm_scalar(std::span<const double> v) {
    return std::sqrt(dot_scalar(v, v));
}

void scale_in_place_scalar(std::span<double> v, double factor) {
    for (double& x : v) x *= factor;
}

namespace {

struct Dispatch {
    Isa isa;
    double (*dot)(std::span<const double>, std::span<const double>);
    double (*l2_norm)(std::span<const double>);
    void (*scale)(std::span<double>, double);
};

constexpr Dispatch kScalar{Isa::Scalar, &dot_scalar, &l2_norm_scalar,
                           &scale_in_place_scalar};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Dispatch kAvx2{Isa::Avx2, &dot_avx2, &l2_norm_avx2,
                         &scale_in_place_avx2};
bool avx2_supported() { return __builtin_cpu_supports("avx2"); }
#endif
#if defined(__aarch64__)
// NEON is baseline on aarch64.
constexpr Dispatch kNeon{Isa::Neon, &dot_neon, &l2_norm_neon,
                         &scale_in_place_neon};
#endif

Dispatch detect() {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported()) return kAvx2;
#endif
#if defined(__aarch64__)
    return kNeon;
#endif
    return kScalar;
}

Dispatch g_dispatch = detect();

}  // namespace

Isa active_isa() { return g_dispatch.isa; }

bool force_isa(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            g_dispatch = kScalar;
            return true;
        case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
            if (avx2_supported()) {
                g_dispatch = kAvx2;
                return true;
            }
#endif
            return false;
        case Isa::Neon:
#if defined(__aarch64__)
            g_dispatch = kNeon;
            return true;
#else
            return false;
#endif
    }
    return false;
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

double dot(std::span<const double> a, std::span<const double> b) {
    return g_dispatch.dot(a, b);
}

double l2_norm(std::span<const double> v) { return g_dispatch.l2_norm(v); }

void scale_in_place(std::span<double> v, double factor) {
    g_dispatch.scale(v, factor);
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return 0.0;
    const double na = g_dispatch.l2_norm(a);
    const double nb = g_dispatch.l2_norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return g_dispatch.dot(a, b) / (na * nb);
}

}  // namespace trace::kernels
