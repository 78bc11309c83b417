// Reference kernels. These define the summation order the SIMD variants must
// reproduce exactly.

#include <cmath>

#include "gazealign/kernels.hpp"

namespace gazealign::kernels::scalar {

double l1(const float* u, const float* v, std::size_t n) {
  double p[kLanes] = {};
  for (std::size_t i = 0; i < n; ++i) {
    p[i % kLanes] += std::fabs(static_cast<double>(u[i]) - static_cast<double>(v[i]));
  }
  return combine_partials(p);
}

double sq_l2(const float* u, const float* v, std::size_t n) {
  double p[kLanes] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(u[i]) - static_cast<double>(v[i]);
    p[i % kLanes] += d * d;
  }
  return combine_partials(p);
}

CosineSums cosine_sums(const float* u, const float* v, std::size_t n) {
  double dot[kLanes] = {}, uu[kLanes] = {}, vv[kLanes] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u[i];
    const double b = v[i];
    dot[i % kLanes] += a * b;
    uu[i % kLanes] += a * a;
    vv[i % kLanes] += b * b;
  }
  return {combine_partials(dot), combine_partials(uu), combine_partials(vv)};
}

}  // namespace gazealign::kernels::scalar
