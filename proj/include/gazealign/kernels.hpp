#pragma once
// Feature-distance reduction kernels.
//
// Every variant reduces in the same fixed order so results are bit-identical
// across instruction sets and thread counts: element i (in index order) is
// widened to double and accumulated into partial sum i % 8; the eight
// partials are then combined as ((p0+p1)+(p2+p3)) + ((p4+p5)+(p6+p7)).
// The AVX2 variant realises the eight partials as two 4-lane double
// accumulators. Builds must not contract multiply-add into FMA.

#include <cstddef>
#include <span>
#include <string_view>

namespace gazealign::kernels {

inline constexpr std::size_t kLanes = 8;

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

// True when the variant is compiled in and the CPU supports it.
bool isa_available(Isa isa);
Isa best_isa();

// Process-wide selection; initialised to best_isa(). Throws ConfigError if
// the requested variant is unavailable.
Isa active_isa();
void set_active_isa(Isa isa);

struct CosineSums {
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
};

namespace scalar {
double l1(const float* u, const float* v, std::size_t n);
double sq_l2(const float* u, const float* v, std::size_t n);
CosineSums cosine_sums(const float* u, const float* v, std::size_t n);
}  // namespace scalar

#if defined(GAZEALIGN_HAVE_AVX2)
namespace avx2 {
double l1(const float* u, const float* v, std::size_t n);
double sq_l2(const float* u, const float* v, std::size_t n);
CosineSums cosine_sums(const float* u, const float* v, std::size_t n);
}  // namespace avx2
#endif

// Dispatching entry points (active_isa()). Spans must have equal length.
double l1(std::span<const float> u, std::span<const float> v);
double sq_l2(std::span<const float> u, std::span<const float> v);
CosineSums cosine_sums(std::span<const float> u, std::span<const float> v);

// The fixed combination tree shared by all variants.
inline double combine_partials(const double (&p)[kLanes]) {
  return ((p[0] + p[1]) + (p[2] + p[3])) + ((p[4] + p[5]) + (p[6] + p[7]));
}

}  // namespace gazealign::kernels
