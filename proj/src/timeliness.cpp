#include "semcode/timeliness.hpp"

#include <cmath>

#include "semcode/error.hpp"

namespace semcode {

namespace {

void require_pdt_linear(const PenaltyConfig& cfg) {
  if (cfg.kind == PenaltyCase::Pdt && cfg.kappa != 1) {
    fail(ErrorKind::UnsupportedCase, "analytic PDT supports kappa=1 (got kappa=" +
                                         std::to_string(cfg.kappa) + ")");
  }
}

// Antiderivative of ln(rho x) with the x -> 0 limit.
double log_antiderivative(double rho, double x) {
  if (x == 0.0) return 0.0;
  return x * (std::log(rho * x) - 1.0);
}

}  // namespace

std::string_view to_string(PenaltyCase c) noexcept {
  switch (c) {
    case PenaltyCase::Edt: return "edt";
    case PenaltyCase::Ldt: return "ldt";
    case PenaltyCase::Pdt: return "pdt";
  }
  return "?";
}

PenaltyCase parse_penalty_case(std::string_view name) {
  if (name == "edt" || name == "EDT") return PenaltyCase::Edt;
  if (name == "ldt" || name == "LDT") return PenaltyCase::Ldt;
  if (name == "pdt" || name == "PDT") return PenaltyCase::Pdt;
  fail(ErrorKind::Config, "case must be one of edt, ldt, pdt (got '" +
                              std::string(name) + "')");
}

void PenaltyConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::InvalidParameter, what); };
  if (!std::isfinite(rho) || rho < 0.0) bad("rho must be finite and >= 0");
  if (!std::isfinite(w) || w <= 0.0) bad("w must be finite and > 0");
  if (!std::isfinite(alpha) || alpha < 0.0) bad("alpha must be finite and >= 0");
  if (!std::isfinite(beta) || beta < 0.0) bad("beta must be finite and >= 0");
  if (kappa < 1) bad("kappa must be >= 1");
  if (kind == PenaltyCase::Ldt && rho == 0.0) bad("LDT requires rho > 0");
}

double penalty_value(const PenaltyConfig& cfg, double delta) {
  if (!std::isfinite(delta)) {
    fail(ErrorKind::InvalidParameter, "penalty_value: delta must be finite");
  }
  switch (cfg.kind) {
    case PenaltyCase::Edt:
      return std::exp(cfg.rho * delta);
    case PenaltyCase::Ldt:
      if (delta <= 0.0) fail(ErrorKind::Domain, "LDT penalty needs delta > 0");
      return std::log(cfg.rho * delta);
    case PenaltyCase::Pdt:
      return cfg.rho * std::pow(delta, cfg.kappa);
  }
  return 0.0;
}

double penalty_segment_integral(const PenaltyConfig& cfg, double age_start,
                                double duration) {
  if (!std::isfinite(age_start) || !std::isfinite(duration)) {
    fail(ErrorKind::InvalidParameter, "segment integral: non-finite input");
  }
  if (age_start < 0.0 || duration < 0.0) {
    fail(ErrorKind::InvalidParameter, "segment integral: negative age or duration");
  }
  const double a = age_start;
  const double b = age_start + duration;
  switch (cfg.kind) {
    case PenaltyCase::Edt: {
      if (cfg.rho == 0.0) return duration;
      // e^{rho a} (e^{rho d} - 1) / rho, with expm1 for small rho d.
      return std::exp(cfg.rho * a) * std::expm1(cfg.rho * duration) / cfg.rho;
    }
    case PenaltyCase::Ldt:
      return log_antiderivative(cfg.rho, b) - log_antiderivative(cfg.rho, a);
    case PenaltyCase::Pdt: {
      const int m = cfg.kappa + 1;
      return cfg.rho * (std::pow(b, m) - std::pow(a, m)) / m;
    }
  }
  return 0.0;
}

double expected_q(const PenaltyConfig& cfg, double mean, double mean_sq,
                  double gamma) {
  require_pdt_linear(cfg);
  if (!(gamma > 0.0)) fail(ErrorKind::InvalidParameter, "gamma must be > 0");
  const double r = cfg.rho;
  const double g = gamma;
  switch (cfg.kind) {
    case PenaltyCase::Edt:
      return 0.5 * r * mean_sq + r * mean * mean + (1.0 + 2.0 * r * g) * mean +
             r * g * g + g;
    case PenaltyCase::Ldt:
      return r * mean_sq + 2.0 * r * mean * mean + 2.0 * (2.0 * r * g - 1.0) * mean +
             2.0 * r * g * g - 2.0 * g;
    case PenaltyCase::Pdt:
      return 0.5 * r * mean_sq + r * mean * mean + 2.0 * r * g * mean + r * g * g;
  }
  return 0.0;
}

QuadraticForm quadratic_form(const PenaltyConfig& cfg, double gamma) {
  cfg.validate();
  require_pdt_linear(cfg);
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    fail(ErrorKind::InvalidParameter, "gamma must be finite and > 0");
  }
  const double r = cfg.rho;
  const double g = gamma;
  QuadraticForm qf;
  qf.gamma = g;
  qf.w_alpha = cfg.w * cfg.alpha;
  qf.w_beta = cfg.w * cfg.beta;
  switch (cfg.kind) {
    case PenaltyCase::Edt:
      qf.A = 0.5 * r + qf.w_beta;
      qf.B = r;
      qf.C = 1.0 + 2.0 * r * g + qf.w_alpha;
      qf.D = r * g * g + g;
      break;
    case PenaltyCase::Ldt:
      qf.A = r + qf.w_beta;
      qf.B = 2.0 * r;
      qf.C = 4.0 * r * g - 2.0 + qf.w_alpha;
      qf.D = 2.0 * r * g * g - 2.0 * g;
      break;
    case PenaltyCase::Pdt:
      qf.A = 0.5 * r + qf.w_beta;
      qf.B = r;
      qf.C = 2.0 * r * g + qf.w_alpha;
      qf.D = r * g * g;
      break;
  }
  if (!(qf.A > 0.0)) {
    fail(ErrorKind::DegenerateObjective,
         "objective has no quadratic term (rho = 0 and beta = 0)");
  }
  return qf;
}

double mean_admitted_gap(double lambda, double q_k) {
  if (!std::isfinite(lambda) || lambda <= 0.0) {
    fail(ErrorKind::InvalidParameter, "lambda must be finite and > 0");
  }
  if (!(q_k > 0.0) || q_k > 1.0 + 1e-12) {
    fail(ErrorKind::InvalidParameter, "q_k must be in (0, 1]");
  }
  return 1.0 / (lambda * q_k);
}

}  // namespace semcode
