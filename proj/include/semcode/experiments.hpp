#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semcode/length_optimizer.hpp"
#include "semcode/probability.hpp"
#include "semcode/timeliness.hpp"

namespace semcode {

/// One solved grid point. A failed point keeps its key and carries the error
/// in `status`; the numeric fields are NaN.
struct SweepRow {
  PenaltyCase kind = PenaltyCase::Edt;
  double lambda = 0.0;
  std::size_t n = 0;
  double s = 0.0;  // zipf exponent, NaN for file pmfs
  double w = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t k = 0;
  double q_k = 0.0;
  double mu = 0.0;
  double mean = 0.0;
  double mean_sq = 0.0;
  double expected_q = 0.0;
  double cost_term = 0.0;
  double j_soi = 0.0;
  std::string status = "ok";

  bool ok() const noexcept { return status == "ok"; }
};

struct SweepSpec {
  std::shared_ptr<const SourcePmf> pmf;
  PenaltyConfig penalty;
  std::vector<double> lambdas = {0.5, 1.0, 5.0, 10.0, 20.0};
  std::vector<std::size_t> ks;        // empty: 1..n
  std::vector<double> cost_params;    // alpha = beta grid for sweep_cost
  SolverOptions solver;
  unsigned jobs = 0;                  // 0: hardware concurrency

  /// Throws Error{InvalidParameter} on empty grids or out-of-range keys.
  void validate() const;
  std::vector<std::size_t> k_grid() const;
};

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Exceptions are
/// rethrown on the calling thread (first by index).
void parallel_for(std::size_t count, unsigned jobs,
                  const std::function<void(std::size_t)>& body);

/// Solves one grid point, recording failures in the row.
SweepRow solve_point(const SourcePmf& pmf, const PenaltyConfig& penalty,
                     double lambda, std::size_t k, const SolverOptions& solver);

struct SweepKResult {
  std::vector<SweepRow> rows;  // ordered by k
  std::optional<std::size_t> argmin;  // index into rows
};

SweepKResult sweep_k(const SweepSpec& spec, double lambda);

struct OptimalK {
  std::size_t k = 0;
  double j_soi = 0.0;
};

/// Exhaustive argmin over k = 1..n; ties go to the smaller k. Throws
/// Error{SweepFailure} if every point failed.
OptimalK find_optimal_k(const SweepSpec& spec, double lambda);

/// Index of the smallest J among ok rows, ties toward the earlier row.
std::optional<std::size_t> argmin_row(const std::vector<SweepRow>& rows);

struct SweepLambdaResult {
  std::vector<SweepRow> rows;  // ordered by (lambda, k)
  std::vector<bool> is_k_min;  // row is the lambda-argmin of its k
};

SweepLambdaResult sweep_lambda(const SweepSpec& spec);

struct Table1Row {
  double lambda = 0.0;
  std::size_t k_star = 0;
  double cost_star = 0.0;
  double j_star = 0.0;
};

struct SweepCostResult {
  std::vector<SweepRow> rows;  // ordered by (lambda, k, cost)
  std::vector<Table1Row> table;  // joint (k, alpha=beta) argmin per lambda
};

/// alpha = beta = c over spec.cost_params, for every lambda and k.
SweepCostResult sweep_cost(const SweepSpec& spec);

struct Calibration {
  double w = 1.0;
  int iterations = 0;
  std::vector<double> trace;  // w after each iteration
};

/// Fixed point w <- E[Q] / (alpha E[L] + beta E[L^2]) at k_ref, at most
/// max_iterations steps, relative tolerance `tolerance`.
Calibration calibrate_w(const SourcePmf& pmf, const PenaltyConfig& penalty,
                        double lambda, std::size_t k_ref,
                        const SolverOptions& solver = {}, int max_iterations = 20,
                        double tolerance = 1e-6);

}  // namespace semcode
