#pragma once

#include <string>
#include <string_view>

namespace semcode {

/// Timeliness penalty shapes: exponential, logarithmic, polynomial.
enum class PenaltyCase { Edt, Ldt, Pdt };

std::string_view to_string(PenaltyCase c) noexcept;
PenaltyCase parse_penalty_case(std::string_view name);

struct PenaltyConfig {
  PenaltyCase kind = PenaltyCase::Edt;
  double rho = 0.5;
  int kappa = 1;
  double w = 1.0;      // weight on the coding cost
  double alpha = 1.0;  // phi(x) = alpha x + beta x^2
  double beta = 1.0;

  /// Throws Error{InvalidParameter} on rho < 0, w <= 0, alpha/beta < 0,
  /// kappa < 1, or rho == 0 for LDT.
  void validate() const;
};

/// Objective A E[L^2] + B (E[L])^2 + C E[L] + D with the weighted coding cost
/// already folded into A and C.
struct QuadraticForm {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double D = 0.0;
  double gamma = 0.0;  // mean admitted inter-arrival time 1/(lambda q_k)
  double w_alpha = 0.0;  // folded cost terms, kept so E[Q] can be split back out
  double w_beta = 0.0;

  double evaluate(double mean, double mean_sq) const noexcept {
    return A * mean_sq + B * mean * mean + C * mean + D;
  }
  double cost_term(double mean, double mean_sq) const noexcept {
    return w_alpha * mean + w_beta * mean_sq;
  }
};

/// g(delta).
double penalty_value(const PenaltyConfig& cfg, double delta);

/// Closed-form integral of g over an age segment [age_start, age_start + duration].
double penalty_segment_integral(const PenaltyConfig& cfg, double age_start,
                                double duration);

/// Analytic mean penalty area per delivery cycle. EDT and LDT use the
/// second-order Taylor expansion; PDT is exact but only for kappa == 1.
double expected_q(const PenaltyConfig& cfg, double mean, double mean_sq,
                  double gamma);

QuadraticForm quadratic_form(const PenaltyConfig& cfg, double gamma);

/// gamma = 1/(lambda q_k), validated.
double mean_admitted_gap(double lambda, double q_k);

}  // namespace semcode
