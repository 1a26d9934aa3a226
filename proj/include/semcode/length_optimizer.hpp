#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "semcode/probability.hpp"
#include "semcode/timeliness.hpp"

namespace semcode {

struct SolverOptions {
  double kraft_tolerance = 1e-12;  // |Kraft - 1| at which bisection stops
  int max_iterations = 200;        // bisection steps
  int max_bracket_expansions = 200;
  double negative_length_tolerance = 1e-9;
  // Multiplies the converged multiplier before lengths are formed. Only the
  // validation suite's negative control sets this.
  double mu_fault_scale = 1.0;
};

struct CodewordSolution {
  std::vector<double> lengths;  // real lengths, bits
  double mu = 0.0;
  double mean = 0.0;       // E[L] = sum p_i l_i
  double mean_sq = 0.0;    // E[L^2] = sum p_i l_i^2
  double kraft_sum = 0.0;  // sum 2^-l_i
  double expected_q = 0.0;
  double cost_term = 0.0;  // w sum p_i (alpha l_i + beta l_i^2)
  double j_soi = 0.0;      // expected_q + cost_term
  double kkt_residual = 0.0;
  int iterations = 0;
  // True when the Kraft constraint is slack (mu = 0): all lengths equal
  // -C / (2(A + B)) and the Kraft sum is below one.
  bool kraft_slack = false;
};

/// Closed-form lengths for a fixed multiplier. Lengths may be negative for
/// small mu; they are only meaningful at the root of the Kraft equation.
std::vector<double> lengths_given_mu(const QuadraticForm& qf,
                                     std::span<const double> probs, double mu);

/// Kraft sum of lengths_given_mu(qf, probs, mu), computed in log space.
double kraft_sum_given_mu(const QuadraticForm& qf, std::span<const double> probs,
                          double mu);

/// Minimizes the quadratic-form objective over real lengths subject to the
/// Kraft inequality. The multiplier is bracketed around a Shannon-scale seed
/// and bisected on Kraft(mu) - 1.
CodewordSolution solve(const QuadraticForm& qf, std::span<const double> probs,
                       const SolverOptions& options = {});

/// quadratic_form + solve for a truncated source at arrival rate lambda.
CodewordSolution optimize(const PenaltyConfig& cfg, const TruncatedSource& source,
                          double lambda, const SolverOptions& options = {});

double objective_at(const QuadraticForm& qf, std::span<const double> probs,
                    std::span<const double> lengths);

/// max_i |2A p_i l_i + 2B p_i E[L] + C p_i - mu ln2 2^-l_i|
double stationarity_residual(const QuadraticForm& qf, std::span<const double> probs,
                             std::span<const double> lengths, double mu);

}  // namespace semcode
