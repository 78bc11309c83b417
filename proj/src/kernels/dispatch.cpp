#include <atomic>

#include "gazealign/error.hpp"
#include "gazealign/kernels.hpp"

namespace gazealign::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(GAZEALIGN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{best_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "scalar";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2: return cpu_has_avx2();
  }
  return false;
}

Isa best_isa() { return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw Error(ErrorCode::ConfigError, std::string("kernel variant ") + std::string(to_string(isa)) +
                                            " is not available on this machine");
  }
  active().store(isa, std::memory_order_relaxed);
}

double l1(std::span<const float> u, std::span<const float> v) {
#if defined(GAZEALIGN_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::l1(u.data(), v.data(), u.size());
#endif
  return scalar::l1(u.data(), v.data(), u.size());
}

double sq_l2(std::span<const float> u, std::span<const float> v) {
#if defined(GAZEALIGN_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::sq_l2(u.data(), v.data(), u.size());
#endif
  return scalar::sq_l2(u.data(), v.data(), u.size());
}

CosineSums cosine_sums(std::span<const float> u, std::span<const float> v) {
#if defined(GAZEALIGN_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::cosine_sums(u.data(), v.data(), u.size());
#endif
  return scalar::cosine_sums(u.data(), v.data(), u.size());
}

}  // namespace gazealign::kernels
