#pragma once

// Scalar reference for the log-space Lambert W iteration. The AVX2 kernel
// mirrors this structure lane-for-lane.

#include <algorithm>
#include <cmath>

namespace semcode::detail {

inline constexpr double kW0ExpTol = 4.0 * 2.220446049250313e-16;
inline constexpr int kMaxHalley = 50;

// Initial guess for v = ln W0(e^t).
inline double w0_exp_guess(double t) {
  if (t < -20.0) return t - std::exp(t);
  if (t < 1.5) {
    const double l = std::log(1.0 + std::exp(t));
    return std::log(l * (1.0 - std::log(1.0 + l) / (2.0 + l)));
  }
  const double lt = std::log(t);
  return std::log(t - lt + lt / t);
}

// Halley on g(v) = e^v + v - t, which is smooth and monotone for all real t.
inline double lambert_w0_exp_ref(double t) {
  double v = w0_exp_guess(t);
  for (int it = 0; it < kMaxHalley; ++it) {
    const double ev = std::exp(v);
    const double g = ev + v - t;
    const double gp = ev + 1.0;
    const double dv = 2.0 * g * gp / (2.0 * gp * gp - g * ev);
    v -= dv;
    if (std::abs(dv) <= kW0ExpTol * std::max(1.0, std::abs(v))) break;
  }
  const double w = std::exp(v);
  // exp(v) carries |v| ulps of error; one Newton step on w + ln w = t
  // recovers full precision for large t.
  if (t > 1.0) return w - (w + std::log(w) - t) * w / (1.0 + w);
  return w;
}

// One Newton step on w e^w = y, for y > 0.
inline double polish_w0(double w, double y) {
  const double ew = std::exp(w);
  return w - (w * ew - y) / (ew * (1.0 + w));
}

}  // namespace semcode::detail
