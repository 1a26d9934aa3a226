#pragma once

#include <span>

namespace semcode {

/// -1/e rounded to the nearest double; the left end of the W0 domain.
inline constexpr double kBranchPoint = -0.36787944117144232159552377016146;

/// Principal branch W0(y) for y >= -1/e.
///
/// Starts from a piecewise asymptotic guess (branch-point series near -1/e,
/// Taylor series near 0, log/log-log for large y) and polishes with Halley
/// steps until |dw| <= 1e-16 (1 + |w|), at most 50 iterations.
///
/// Throws Error{Domain} for y < -1/e and Error{InvalidParameter} for
/// non-finite y.
double lambert_w0(double y);

/// W0(exp(t)) evaluated without forming exp(t), so t may be far beyond the
/// double exponent range. Solves e^v + v = t for v = ln W and returns e^v.
double lambert_w0_exp(double t);

/// Batched W0 over a span (y >= -1/e each), using the runtime-selected kernel.
void lambert_w0(std::span<const double> y, std::span<double> out);

/// Batched W0(exp(t)).
void lambert_w0_exp(std::span<const double> t, std::span<double> out);

}  // namespace semcode
