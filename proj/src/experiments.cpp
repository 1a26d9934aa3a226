#include "semcode/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "semcode/error.hpp"

namespace semcode {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void SweepSpec::validate() const {
  if (!pmf) fail(ErrorKind::InvalidParameter, "sweep has no pmf");
  penalty.validate();
  if (lambdas.empty()) fail(ErrorKind::InvalidParameter, "lambda grid is empty");
  for (double l : lambdas) {
    if (!std::isfinite(l) || l <= 0.0) {
      fail(ErrorKind::InvalidParameter, "lambda grid values must be finite and > 0");
    }
  }
  for (std::size_t k : ks) {
    if (k < 1 || k > pmf->size()) {
      fail(ErrorKind::InvalidParameter,
           "k grid value " + std::to_string(k) + " outside 1.." +
               std::to_string(pmf->size()));
    }
  }
  for (double c : cost_params) {
    if (!std::isfinite(c) || c < 0.0) {
      fail(ErrorKind::InvalidParameter, "cost parameters must be finite and >= 0");
    }
  }
}

std::vector<std::size_t> SweepSpec::k_grid() const {
  if (!ks.empty()) {
    auto out = ks;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  std::vector<std::size_t> out(pmf->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i + 1;
  return out;
}

void parallel_for(std::size_t count, unsigned jobs,
                  const std::function<void(std::size_t)>& body) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t first_failed = count;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < first_failed) {
          first_failed = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

SweepRow solve_point(const SourcePmf& pmf, const PenaltyConfig& penalty,
                     double lambda, std::size_t k, const SolverOptions& solver) {
  SweepRow row;
  row.kind = penalty.kind;
  row.lambda = lambda;
  row.n = pmf.size();
  row.s = pmf.zipf_exponent();
  row.w = penalty.w;
  row.alpha = penalty.alpha;
  row.beta = penalty.beta;
  row.k = k;
  try {
    const auto source = truncate(pmf, k);
    row.q_k = source.q_k();
    const auto sol = optimize(penalty, source, lambda, solver);
    row.mu = sol.mu;
    row.mean = sol.mean;
    row.mean_sq = sol.mean_sq;
    row.expected_q = sol.expected_q;
    row.cost_term = sol.cost_term;
    row.j_soi = sol.j_soi;
  } catch (const Error& e) {
    if (!e.is_numerical()) throw;
    row.mu = row.mean = row.mean_sq = row.expected_q = row.cost_term = row.j_soi = kNaN;
    row.status = std::string(to_string(e.kind()));
  }
  return row;
}

std::optional<std::size_t> argmin_row(const std::vector<SweepRow>& rows) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].ok()) continue;
    if (!best || rows[i].j_soi < rows[*best].j_soi) best = i;
  }
  return best;
}

SweepKResult sweep_k(const SweepSpec& spec, double lambda) {
  spec.validate();
  const auto ks = spec.k_grid();
  SweepKResult out;
  out.rows.resize(ks.size());
  parallel_for(ks.size(), spec.jobs, [&](std::size_t i) {
    out.rows[i] = solve_point(*spec.pmf, spec.penalty, lambda, ks[i], spec.solver);
  });
  out.argmin = argmin_row(out.rows);
  return out;
}

OptimalK find_optimal_k(const SweepSpec& spec, double lambda) {
  SweepSpec full = spec;
  full.ks.clear();
  const auto res = sweep_k(full, lambda);
  if (!res.argmin) {
    fail(ErrorKind::SweepFailure, "every k failed at lambda=" + std::to_string(lambda));
  }
  const auto& row = res.rows[*res.argmin];
  return {row.k, row.j_soi};
}

SweepLambdaResult sweep_lambda(const SweepSpec& spec) {
  spec.validate();
  auto lambdas = spec.lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  const auto ks = spec.k_grid();
  SweepLambdaResult out;
  out.rows.resize(lambdas.size() * ks.size());
  parallel_for(out.rows.size(), spec.jobs, [&](std::size_t i) {
    out.rows[i] = solve_point(*spec.pmf, spec.penalty, lambdas[i / ks.size()],
                              ks[i % ks.size()], spec.solver);
  });
  out.is_k_min.assign(out.rows.size(), false);
  for (std::size_t kk = 0; kk < ks.size(); ++kk) {
    std::optional<std::size_t> best;
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      const std::size_t i = li * ks.size() + kk;
      if (!out.rows[i].ok()) continue;
      if (!best || out.rows[i].j_soi < out.rows[*best].j_soi) best = i;
    }
    if (best) out.is_k_min[*best] = true;
  }
  return out;
}

SweepCostResult sweep_cost(const SweepSpec& spec) {
  spec.validate();
  if (spec.cost_params.empty()) {
    fail(ErrorKind::InvalidParameter, "cost parameter grid is empty");
  }
  auto lambdas = spec.lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  auto costs = spec.cost_params;
  std::sort(costs.begin(), costs.end());
  const auto ks = spec.k_grid();
  const std::size_t per_lambda = ks.size() * costs.size();

  SweepCostResult out;
  out.rows.resize(lambdas.size() * per_lambda);
  parallel_for(out.rows.size(), spec.jobs, [&](std::size_t i) {
    const std::size_t li = i / per_lambda;
    const std::size_t rest = i % per_lambda;
    PenaltyConfig pc = spec.penalty;
    pc.alpha = pc.beta = costs[rest % costs.size()];
    out.rows[i] = solve_point(*spec.pmf, pc, lambdas[li], ks[rest / costs.size()],
                              spec.solver);
  });

  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    std::optional<std::size_t> best;
    for (std::size_t i = li * per_lambda; i < (li + 1) * per_lambda; ++i) {
      if (!out.rows[i].ok()) continue;
      if (!best || out.rows[i].j_soi < out.rows[*best].j_soi) best = i;
    }
    if (!best) {
      fail(ErrorKind::SweepFailure,
           "every grid point failed at lambda=" + std::to_string(lambdas[li]));
    }
    const auto& r = out.rows[*best];
    out.table.push_back({lambdas[li], r.k, r.alpha, r.j_soi});
  }
  return out;
}

Calibration calibrate_w(const SourcePmf& pmf, const PenaltyConfig& penalty,
                        double lambda, std::size_t k_ref,
                        const SolverOptions& solver, int max_iterations,
                        double tolerance) {
  const auto source = truncate(pmf, k_ref);
  Calibration cal;
  PenaltyConfig pc = penalty;
  for (int it = 1; it <= max_iterations; ++it) {
    const auto sol = optimize(pc, source, lambda, solver);
    const double raw_cost = pc.alpha * sol.mean + pc.beta * sol.mean_sq;
    if (!(raw_cost > 0.0) || !(sol.expected_q > 0.0)) {
      fail(ErrorKind::CalibrationFailure,
           "cannot balance terms: E[Q]=" + std::to_string(sol.expected_q) +
               ", cost=" + std::to_string(raw_cost));
    }
    const double next = sol.expected_q / raw_cost;
    cal.trace.push_back(next);
    cal.iterations = it;
    const bool done = std::abs(next - pc.w) <= tolerance * std::abs(next);
    pc.w = next;
    if (done) {
      cal.w = next;
      return cal;
    }
  }
  std::ostringstream msg;
  msg << "w fixed point did not converge in " << max_iterations << " iterations; trace:";
  for (double w : cal.trace) msg << ' ' << w;
  fail(ErrorKind::CalibrationFailure, msg.str());
}

}  // namespace semcode
