#include "semcode/lambert_w.hpp"

#include <cmath>
#include <sstream>

#include "semcode/error.hpp"
#include "semcode/simd/kernels.hpp"
#include "simd/scalar_math.hpp"

namespace semcode {

namespace {

constexpr double kEHi = 2.718281828459045;
constexpr double kELo = 1.4456468917292502e-16;

std::string describe(double y) {
  std::ostringstream os;
  os.precision(17);
  os << y;
  return os.str();
}

void check_argument(double y) {
  if (!std::isfinite(y)) {
    fail(ErrorKind::InvalidParameter, "lambert_w0: argument must be finite");
  }
  if (y < kBranchPoint) {
    fail(ErrorKind::Domain,
         "lambert_w0: argument " + describe(y) + " is below -1/e");
  }
}

double initial_guess(double y) {
  if (y < -0.25) {
    // Series in p = sqrt(2(e y + 1)) around the branch point; e*y + 1 is
    // formed with a split e to avoid cancellation.
    const double ey1 = std::fma(kEHi, y, 1.0) + kELo * y;
    const double p = std::sqrt(2.0 * std::max(ey1, 0.0));
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 +
                                  p * (11.0 / 72.0 +
                                       p * (-43.0 / 540.0 + p * (769.0 / 17280.0)))));
  }
  if (y <= 0.25) {
    return y * (1.0 + y * (-1.0 + y * (1.5 + y * (-8.0 / 3.0 + y * (125.0 / 24.0)))));
  }
  if (y < 3.0) {
    const double l = std::log1p(y);
    return l * (1.0 - std::log1p(l) / (2.0 + l));
  }
  const double l1 = std::log(y);
  const double l2 = std::log(l1);
  return l1 - l2 + l2 / l1 + l2 * (l2 - 2.0) / (2.0 * l1 * l1);
}

}  // namespace

double lambert_w0(double y) {
  check_argument(y);
  if (y == 0.0) return 0.0;
  if (y == kBranchPoint) return -1.0;

  double w = initial_guess(y);
  for (int it = 0; it < 50; ++it) {
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double ew = std::exp(w);
    const double f = w * ew - y;
    const double dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    if (!std::isfinite(dw)) break;
    w -= dw;
    if (std::abs(dw) <= 1e-16 * (1.0 + std::abs(w))) break;
  }
  return std::max(w, -1.0);
}

double lambert_w0_exp(double t) {
  if (std::isnan(t) || t == HUGE_VAL) {
    fail(ErrorKind::InvalidParameter, "lambert_w0_exp: argument must be finite");
  }
  if (t == -HUGE_VAL) return 0.0;
  return detail::lambert_w0_exp_ref(t);
}

void lambert_w0(std::span<const double> y, std::span<double> out) {
  if (y.size() != out.size()) {
    fail(ErrorKind::InvalidParameter, "lambert_w0: output size mismatch");
  }
  for (double v : y) check_argument(v);
  simd::active_kernels().lambert_w0(y.data(), out.data(), y.size());
}

void lambert_w0_exp(std::span<const double> t, std::span<double> out) {
  if (t.size() != out.size()) {
    fail(ErrorKind::InvalidParameter, "lambert_w0_exp: output size mismatch");
  }
  for (double v : t) {
    if (!std::isfinite(v)) {
      fail(ErrorKind::InvalidParameter, "lambert_w0_exp: arguments must be finite");
    }
  }
  simd::active_kernels().lambert_w0_exp(t.data(), out.data(), t.size());
}

}  // namespace semcode
