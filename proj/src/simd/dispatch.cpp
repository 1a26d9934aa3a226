#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "semcode/error.hpp"

namespace semcode::simd {

namespace {

constexpr KernelTable kScalar{Isa::Scalar, &scalar::lambert_w0_exp,
                              &scalar::lambert_w0, &scalar::sum_exp_shifted,
                              &scalar::weighted_moments};

#if SEMCODE_HAVE_AVX2
constexpr KernelTable kAvx2{Isa::Avx2, &avx2::lambert_w0_exp, &avx2::lambert_w0,
                            &avx2::sum_exp_shifted, &avx2::weighted_moments};
#endif

bool cpu_has_avx2() noexcept {
#if SEMCODE_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() noexcept {
  const char* env = std::getenv("SEMCODE_SIMD");
  if (env != nullptr && std::string(env) == "scalar") return &kScalar;
#if SEMCODE_HAVE_AVX2
  if (cpu_has_avx2()) return &kAvx2;
#endif
  return &kScalar;
}

std::atomic<const KernelTable*>& active_slot() noexcept {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool isa_available(Isa isa) noexcept {
  return isa == Isa::Scalar || cpu_has_avx2();
}

const KernelTable& kernel_table(Isa isa) {
  if (isa == Isa::Scalar) return kScalar;
#if SEMCODE_HAVE_AVX2
  if (cpu_has_avx2()) return kAvx2;
#endif
  fail(ErrorKind::InvalidParameter, "AVX2 kernels are not available on this machine");
}

const KernelTable& active_kernels() noexcept {
  return *active_slot().load(std::memory_order_acquire);
}

Isa active_isa() noexcept { return active_kernels().isa; }

void set_active_isa(Isa isa) {
  active_slot().store(&kernel_table(isa), std::memory_order_release);
}

}  // namespace semcode::simd
