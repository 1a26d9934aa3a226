#include "semcode/length_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "semcode/error.hpp"
#include "semcode/lambert_w.hpp"
#include "semcode/simd/kernels.hpp"

namespace semcode {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void check_inputs(const QuadraticForm& qf, std::span<const double> probs) {
  if (!(qf.A > 0.0)) {
    fail(ErrorKind::DegenerateObjective, "quadratic coefficient A must be > 0");
  }
  if (probs.empty()) fail(ErrorKind::InvalidParameter, "empty probability vector");
  for (double p : probs) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      fail(ErrorKind::InvalidParameter, "probabilities must be finite and > 0");
    }
  }
}

// Evaluates the closed-form lengths for a given multiplier without
// allocating. With E = 2B EL(mu) + C and c_i = mu ln^2(2) / (2A p_i):
//   W_i = W0(c_i 2^{E/2A}),  l_i = W_i / ln2 - E / 2A,
//   2^{-l_i} = exp(E ln2 / 2A - W_i).
// The W0 argument is handled through its logarithm so 2^{E/2A} never has to
// be formed.
class MultiplierMap {
 public:
  MultiplierMap(const QuadraticForm& qf, std::span<const double> probs)
      : qf_(qf), log_p_(probs.size()), t_(probs.size()), w_(probs.size()) {
    for (std::size_t i = 0; i < probs.size(); ++i) log_p_[i] = std::log(probs[i]);
  }

  double kraft(double mu) {
    const double shift = evaluate_w(mu);
    return simd::sum_exp_shifted(w_, shift * kLn2);
  }

  std::vector<double> lengths(double mu) {
    const double shift = evaluate_w(mu);
    std::vector<double> out(w_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = w_[i] / kLn2 - shift;
    return out;
  }

 private:
  // Fills w_ and returns E / 2A.
  double evaluate_w(double mu) {
    const double mean = (mu * kLn2 - qf_.C) / (2.0 * qf_.A + 2.0 * qf_.B);
    const double e = 2.0 * qf_.B * mean + qf_.C;
    const double shift = e / (2.0 * qf_.A);
    const double base = std::log(mu * kLn2 * kLn2 / (2.0 * qf_.A)) + shift * kLn2;
    if (!std::isfinite(base)) {
      fail(ErrorKind::NumericRange,
           "Lambert-W argument out of range at mu=" + std::to_string(mu));
    }
    for (std::size_t i = 0; i < t_.size(); ++i) t_[i] = base - log_p_[i];
    simd::active_kernels().lambert_w0_exp(t_.data(), w_.data(), t_.size());
    return shift;
  }

  QuadraticForm qf_;
  std::vector<double> log_p_;
  std::vector<double> t_;
  std::vector<double> w_;
};

void finish(const QuadraticForm& qf, std::span<const double> probs,
            CodewordSolution& sol) {
  const auto m = simd::weighted_moments(probs, sol.lengths);
  sol.mean = m.mean;
  sol.mean_sq = m.mean_sq;
  sol.kraft_sum = m.kraft;
  sol.cost_term = qf.cost_term(sol.mean, sol.mean_sq);
  sol.expected_q = qf.evaluate(sol.mean, sol.mean_sq) - sol.cost_term;
  sol.j_soi = sol.expected_q + sol.cost_term;
  sol.kkt_residual = stationarity_residual(qf, probs, sol.lengths, sol.mu);
}

CodewordSolution slack_solution(const QuadraticForm& qf,
                                std::span<const double> probs) {
  CodewordSolution sol;
  sol.kraft_slack = true;
  sol.mu = 0.0;
  sol.lengths.assign(probs.size(), -qf.C / (2.0 * (qf.A + qf.B)));
  finish(qf, probs, sol);
  return sol;
}

}  // namespace

std::vector<double> lengths_given_mu(const QuadraticForm& qf,
                                     std::span<const double> probs, double mu) {
  check_inputs(qf, probs);
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    fail(ErrorKind::InvalidParameter, "mu must be finite and > 0");
  }
  return MultiplierMap(qf, probs).lengths(mu);
}

double kraft_sum_given_mu(const QuadraticForm& qf, std::span<const double> probs,
                          double mu) {
  check_inputs(qf, probs);
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    fail(ErrorKind::InvalidParameter, "mu must be finite and > 0");
  }
  return MultiplierMap(qf, probs).kraft(mu);
}

CodewordSolution solve(const QuadraticForm& qf, std::span<const double> probs,
                       const SolverOptions& options) {
  check_inputs(qf, probs);
  const std::size_t k = probs.size();

  // As mu -> 0+ every length tends to -C / (2(A+B)). If that point already
  // satisfies Kraft, the constraint is inactive and mu = 0.
  const double limit_len = -qf.C / (2.0 * (qf.A + qf.B));
  const double kraft_at_zero = static_cast<double>(k) * std::exp2(-limit_len);
  if (kraft_at_zero <= 1.0) return slack_solution(qf, probs);

  CodewordSolution sol;
  if (k == 1) {
    // Kraft equality pins the single length to zero.
    sol.mu = options.mu_fault_scale * qf.C / kLn2;
    sol.lengths = {0.0};
    if (options.mu_fault_scale != 1.0) sol.lengths = lengths_given_mu(qf, probs, sol.mu);
    finish(qf, probs, sol);
    return sol;
  }

  MultiplierMap map(qf, probs);
  auto h = [&](double mu) { return map.kraft(mu) - 1.0; };

  const double scale = 2.0 * (qf.A + qf.B);
  double seed = (scale * entropy_bits(probs) + qf.C) / kLn2;
  if (!(seed > 0.0)) seed = scale / kLn2;

  double lo = seed;
  double hi = seed;
  double h_lo = h(seed);
  double h_hi = h_lo;
  int expansions = 0;
  while (h_hi > 0.0) {
    if (++expansions > options.max_bracket_expansions) {
      fail(ErrorKind::NoSolution, "no sign change of Kraft(mu) - 1 above mu=" +
                                      std::to_string(seed));
    }
    lo = hi;
    h_lo = h_hi;
    hi *= 4.0;
    h_hi = h(hi);
  }
  expansions = 0;
  while (h_lo < 0.0) {
    if (++expansions > options.max_bracket_expansions) {
      fail(ErrorKind::NoSolution, "no sign change of Kraft(mu) - 1 below mu=" +
                                      std::to_string(seed));
    }
    hi = lo;
    h_hi = h_lo;
    lo /= 4.0;
    h_lo = h(lo);
  }
  if (!(h_lo >= 0.0 && h_hi <= 0.0)) {
    fail(ErrorKind::NoSolution, "Kraft(mu) is not decreasing across the bracket");
  }

  double best_mu = std::abs(h_lo) < std::abs(h_hi) ? lo : hi;
  double best_h = std::min(std::abs(h_lo), std::abs(h_hi));
  int it = 0;
  while (best_h > options.kraft_tolerance && it < options.max_iterations) {
    ++it;
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double h_mid = h(mid);
    if (std::abs(h_mid) < best_h) {
      best_h = std::abs(h_mid);
      best_mu = mid;
    }
    if (h_mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  sol.iterations = it;
  sol.mu = best_mu * options.mu_fault_scale;
  sol.lengths = map.lengths(sol.mu);
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(sol.lengths[i])) {
      fail(ErrorKind::NumericRange, "non-finite length for symbol " + std::to_string(i));
    }
    if (sol.lengths[i] < -options.negative_length_tolerance) {
      fail(ErrorKind::ConstraintViolation,
           "negative length " + std::to_string(sol.lengths[i]) + " at symbol " +
               std::to_string(i));
    }
  }
  finish(qf, probs, sol);
  return sol;
}

CodewordSolution optimize(const PenaltyConfig& cfg, const TruncatedSource& source,
                          double lambda, const SolverOptions& options) {
  const double gamma = mean_admitted_gap(lambda, source.q_k());
  const QuadraticForm qf = quadratic_form(cfg, gamma);
  CodewordSolution sol = solve(qf, source.cond_probs(), options);
  sol.expected_q = semcode::expected_q(cfg, sol.mean, sol.mean_sq, gamma);
  sol.cost_term = cfg.w * (cfg.alpha * sol.mean + cfg.beta * sol.mean_sq);
  sol.j_soi = sol.expected_q + sol.cost_term;
  return sol;
}

double objective_at(const QuadraticForm& qf, std::span<const double> probs,
                    std::span<const double> lengths) {
  if (probs.size() != lengths.size()) {
    fail(ErrorKind::InvalidParameter, "objective_at: arity mismatch");
  }
  double mean = 0.0;
  double mean_sq = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!std::isfinite(lengths[i])) {
      fail(ErrorKind::InvalidParameter, "objective_at: non-finite length");
    }
    mean += probs[i] * lengths[i];
    mean_sq += probs[i] * lengths[i] * lengths[i];
  }
  return qf.evaluate(mean, mean_sq);
}

double stationarity_residual(const QuadraticForm& qf, std::span<const double> probs,
                             std::span<const double> lengths, double mu) {
  double mean = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) mean += probs[i] * lengths[i];
  double worst = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double r = 2.0 * qf.A * probs[i] * lengths[i] + 2.0 * qf.B * probs[i] * mean +
                     qf.C * probs[i] - mu * kLn2 * std::exp2(-lengths[i]);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace semcode
