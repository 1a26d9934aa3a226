#pragma once

// Data-parallel inner loops of the optimizer and the validation sweeps.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is picked once at startup from CPUID and can
// be pinned with SEMCODE_SIMD=scalar|avx2 or set_active_isa(). Variants agree
// to a few ulps, not bit-for-bit (reductions use different summation orders).

#include <cstddef>
#include <span>
#include <string_view>

namespace semcode::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

struct Moments {
  double mean = 0.0;     // sum p_i l_i
  double mean_sq = 0.0;  // sum p_i l_i^2
  double kraft = 0.0;    // sum 2^-l_i
};

struct KernelTable {
  Isa isa;
  // out[i] = W0(exp(t[i])); t finite.
  void (*lambert_w0_exp)(const double* t, double* out, std::size_t n);
  // out[i] = W0(y[i]); y >= -1/e, finite.
  void (*lambert_w0)(const double* y, double* out, std::size_t n);
  // sum_i exp(offset - w[i])
  double (*sum_exp_shifted)(const double* w, std::size_t n, double offset);
  Moments (*weighted_moments)(const double* p, const double* len, std::size_t n);
};

bool isa_available(Isa isa) noexcept;

/// Kernel table for a specific ISA; throws Error{InvalidParameter} if the ISA
/// is not compiled in or not supported by this CPU.
const KernelTable& kernel_table(Isa isa);

const KernelTable& active_kernels() noexcept;
Isa active_isa() noexcept;
void set_active_isa(Isa isa);

inline double sum_exp_shifted(std::span<const double> w, double offset) {
  return active_kernels().sum_exp_shifted(w.data(), w.size(), offset);
}

inline Moments weighted_moments(std::span<const double> p,
                                std::span<const double> len) {
  return active_kernels().weighted_moments(p.data(), len.data(), p.size());
}

}  // namespace semcode::simd
