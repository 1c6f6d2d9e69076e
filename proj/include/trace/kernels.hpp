#pragma once
// Vector arithmetic kernels behind the embedding-similarity layer.
//
// Every kernel exists as a scalar reference implementation plus, where the
// target architecture provides one, a SIMD variant (AVX2 on x86-64, NEON on
// aarch64). The dispatched entry points select an implementation once per
// process based on runtime CPU detection; tests compare every variant
// against the scalar reference on random inputs.

#include <cstddef>
#include <span>
#include <string_view>

namespace trace::kernels {

enum class Isa {
    Scalar,
    Avx2,
    Neon,
};

// ISA chosen by runtime detection (or forced via force_isa).
Isa active_isa();

// Force a specific ISA for the dispatched entry points. Returns false if the
// requested ISA is not available on this machine. Intended for tests.
bool force_isa(Isa isa);

std::string_view isa_name(Isa isa);

// Dispatched entry points.
double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);
// Cosine similarity; zero for a zero-length or zero-norm input.
double cosine(std::span<const double> a, std::span<const double> b);
void scale_in_place(std::span<double> v, double factor);

// Scalar reference implementations, always available.
double dot_scalar(std::span<const double> a, std::span<const double> b);
double l2_norm_scalar(std::span<const double> v);
void scale_in_place_scalar(std::span<double> v, double factor);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(std::span<const double> a, std::span<const double> b);
double l2_norm_avx2(std::span<const double> v);
void scale_in_place_avx2(std::span<double> v, double factor);
#endif

#if defined(__aarch64__)
double dot_neon(std::span<const double> a, std::span<const double> b);
double l2_norm_neon(std::span<const double> v);
void scale_in_place_neon(std::span<double> v, double factor);
#endif

}  // namespace trace::kernels
