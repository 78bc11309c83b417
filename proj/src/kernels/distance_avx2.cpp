// AVX2 kernels. Compiled with -mavx2 only; reached through runtime dispatch.
// Lanes 0-3 of `lo` and `hi` hold partials i % 8 in [0, 4) and [4, 8).

#include <immintrin.h>

#include <cmath>

#include "gazealign/kernels.hpp"

namespace gazealign::kernels::avx2 {

namespace {

struct Widened {
  __m256d lo, hi;
};

inline Widened widen(const float* p) {
  const __m256 x = _mm256_loadu_ps(p);
  return {_mm256_cvtps_pd(_mm256_castps256_ps128(x)), _mm256_cvtps_pd(_mm256_extractf128_ps(x, 1))};
}

inline void spill(__m256d lo, __m256d hi, double (&p)[kLanes]) {
  _mm256_storeu_pd(p, lo);
  _mm256_storeu_pd(p + 4, hi);
}

}  // namespace

double l1(const float* u, const float* v, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc_lo = _mm256_setzero_pd();
  __m256d acc_hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const Widened a = widen(u + i);
    const Widened b = widen(v + i);
    acc_lo = _mm256_add_pd(acc_lo, _mm256_andnot_pd(sign, _mm256_sub_pd(a.lo, b.lo)));
    acc_hi = _mm256_add_pd(acc_hi, _mm256_andnot_pd(sign, _mm256_sub_pd(a.hi, b.hi)));
  }
  double p[kLanes];
  spill(acc_lo, acc_hi, p);
  for (; i < n; ++i) {
    p[i % kLanes] += std::fabs(static_cast<double>(u[i]) - static_cast<double>(v[i]));
  }
  return combine_partials(p);
}

double sq_l2(const float* u, const float* v, std::size_t n) {
  __m256d acc_lo = _mm256_setzero_pd();
  __m256d acc_hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const Widened a = widen(u + i);
    const Widened b = widen(v + i);
    const __m256d d_lo = _mm256_sub_pd(a.lo, b.lo);
    const __m256d d_hi = _mm256_sub_pd(a.hi, b.hi);
    acc_lo = _mm256_add_pd(acc_lo, _mm256_mul_pd(d_lo, d_lo));
    acc_hi = _mm256_add_pd(acc_hi, _mm256_mul_pd(d_hi, d_hi));
  }
  double p[kLanes];
  spill(acc_lo, acc_hi, p);
  for (; i < n; ++i) {
    const double d = static_cast<double>(u[i]) - static_cast<double>(v[i]);
    p[i % kLanes] += d * d;
  }
  return combine_partials(p);
}

CosineSums cosine_sums(const float* u, const float* v, std::size_t n) {
  __m256d dot_lo = _mm256_setzero_pd(), dot_hi = _mm256_setzero_pd();
  __m256d uu_lo = _mm256_setzero_pd(), uu_hi = _mm256_setzero_pd();
  __m256d vv_lo = _mm256_setzero_pd(), vv_hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const Widened a = widen(u + i);
    const Widened b = widen(v + i);
    dot_lo = _mm256_add_pd(dot_lo, _mm256_mul_pd(a.lo, b.lo));
    dot_hi = _mm256_add_pd(dot_hi, _mm256_mul_pd(a.hi, b.hi));
    uu_lo = _mm256_add_pd(uu_lo, _mm256_mul_pd(a.lo, a.lo));
    uu_hi = _mm256_add_pd(uu_hi, _mm256_mul_pd(a.hi, a.hi));
    vv_lo = _mm256_add_pd(vv_lo, _mm256_mul_pd(b.lo, b.lo));
    vv_hi = _mm256_add_pd(vv_hi, _mm256_mul_pd(b.hi, b.hi));
  }
  double dot[kLanes], uu[kLanes], vv[kLanes];
  spill(dot_lo, dot_hi, dot);
  spill(uu_lo, uu_hi, uu);
  spill(vv_lo, vv_hi, vv);
  for (; i < n; ++i) {
    const double a = u[i];
    const double b = v[i];
    dot[i % kLanes] += a * b;
    uu[i % kLanes] += a * a;
    vv[i % kLanes] += b * b;
  }
  return {combine_partials(dot), combine_partials(uu), combine_partials(vv)};
}

}  // namespace gazealign::kernels::avx2
