#include <cmath>

#include "kernels_impl.hpp"
#include "scalar_math.hpp"
#include "semcode/lambert_w.hpp"

namespace semcode::simd::scalar {

void lambert_w0_exp(const double* t, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = detail::lambert_w0_exp_ref(t[i]);
}

void lambert_w0(const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] > 0.0) {
      out[i] = detail::polish_w0(detail::lambert_w0_exp_ref(std::log(y[i])), y[i]);
    } else if (y[i] == 0.0) {
      out[i] = 0.0;
    } else {
      out[i] = semcode::lambert_w0(y[i]);
    }
  }
}

double sum_exp_shifted(const double* w, std::size_t n, double offset) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::exp(offset - w[i]);
  return acc;
}

Moments weighted_moments(const double* p, const double* len, std::size_t n) {
  Moments m;
  for (std::size_t i = 0; i < n; ++i) {
    m.mean += p[i] * len[i];
    m.mean_sq += p[i] * len[i] * len[i];
    m.kraft += std::exp2(-len[i]);
  }
  return m;
}

}  // namespace semcode::simd::scalar
