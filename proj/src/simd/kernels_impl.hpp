#pragma once

#include <cstddef>

#include "semcode/simd/kernels.hpp"

namespace semcode::simd {

namespace scalar {
void lambert_w0_exp(const double* t, double* out, std::size_t n);
void lambert_w0(const double* y, double* out, std::size_t n);
double sum_exp_shifted(const double* w, std::size_t n, double offset);
Moments weighted_moments(const double* p, const double* len, std::size_t n);
}  // namespace scalar

#if SEMCODE_HAVE_AVX2
namespace avx2 {
void lambert_w0_exp(const double* t, double* out, std::size_t n);
void lambert_w0(const double* y, double* out, std::size_t n);
double sum_exp_shifted(const double* w, std::size_t n, double offset);
Moments weighted_moments(const double* p, const double* len, std::size_t n);
}  // namespace avx2
#endif

}  // namespace semcode::simd
