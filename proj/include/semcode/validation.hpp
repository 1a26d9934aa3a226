#pragma once

#include <span>
#include <string>
#include <vector>

#include "semcode/timeliness.hpp"

namespace semcode {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::size_t cases = 0;
  std::string first_failure;  // empty when passed
  double seconds = 0.0;
};

struct ValidationOptions {
  std::vector<std::string> suites;  // empty: all
  // Negative control: scales the converged multiplier by (1 + 1e-3) in the
  // KKT suite.
  bool inject_fault = false;
};

const std::vector<std::string>& validation_suite_names();

/// Throws Error{Config} for an unknown suite name.
std::vector<SuiteResult> run_validation(const ValidationOptions& options);

/// Minimum of the quadratic-form objective over lengths on a regular grid
/// (spacing `step` on [0, max_len]^k) whose Kraft sum lies within `band` of
/// one. Each grid point is shifted uniformly onto Kraft = 1 before it is
/// scored, so the result is the objective of a feasible point. k in {1,2,3}.
double grid_oracle_min(const QuadraticForm& qf, std::span<const double> probs,
                       double step = 0.005, double max_len = 20.0,
                       double band = 0.002);

}  // namespace semcode
