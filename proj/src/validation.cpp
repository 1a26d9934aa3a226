#include "semcode/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "semcode/error.hpp"
#include "semcode/experiments.hpp"
#include "semcode/lambert_w.hpp"
#include "semcode/length_optimizer.hpp"
#include "semcode/probability.hpp"
#include "semcode/simd/kernels.hpp"
#include "semcode/simulator.hpp"

namespace semcode {

namespace {

class Recorder {
 public:
  explicit Recorder(SuiteResult& r) : r_(r) {}
  void check(bool ok, const std::function<std::string()>& describe) {
    ++r_.cases;
    if (!ok && r_.first_failure.empty()) r_.first_failure = describe();
  }

 private:
  SuiteResult& r_;
};

std::string fmt(double x) {
  std::ostringstream o;
  o.precision(17);
  o << x;
  return o.str();
}

void suite_lambertw(Recorder& rec) {
  constexpr int kPositive = 1'000'000;
  std::vector<double> ys(kPositive);
  for (int i = 0; i < kPositive; ++i) {
    ys[i] = std::pow(10.0, -12.0 + 24.0 * i / (kPositive - 1));
  }
  std::vector<double> ws(ys.size());
  lambert_w0(ys, ws);
  for (int i = 0; i < kPositive; ++i) {
    const double res = std::abs(ws[i] * std::exp(ws[i]) - ys[i]) / ys[i];
    rec.check(res <= 1e-12, [&] { return "W0(" + fmt(ys[i]) + ") residual " + fmt(res); });
  }
  constexpr int kNegative = 1000;
  for (int i = 0; i < kNegative; ++i) {
    const double y = kBranchPoint * (1.0 - static_cast<double>(i) / kNegative);
    const double w = lambert_w0(y);
    const double res = std::abs(w * std::exp(w) - y) / std::abs(y);
    rec.check(res <= 1e-12, [&] { return "W0(" + fmt(y) + ") residual " + fmt(res); });
  }
}

void suite_kkt(Recorder& rec, bool inject_fault) {
  SolverOptions opts;
  if (inject_fault) opts.mu_fault_scale = 1.0 + 1e-3;
  const SourcePmf pmfs[] = {zipf_pmf(100, 0.4), uniform_pmf(100)};
  for (const auto& pmf : pmfs) {
    for (PenaltyCase c : {PenaltyCase::Edt, PenaltyCase::Ldt, PenaltyCase::Pdt}) {
      PenaltyConfig cfg;
      cfg.kind = c;
      for (double lambda : {0.5, 1.0, 5.0, 10.0, 20.0}) {
        for (std::size_t k : {1, 2, 5, 10, 18, 50, 100}) {
          const auto where = [&] {
            return pmf.label() + " " + std::string(to_string(c)) + " lambda=" + fmt(lambda) +
                   " k=" + std::to_string(k);
          };
          CodewordSolution sol;
          try {
            sol = optimize(cfg, truncate(pmf, k), lambda, opts);
          } catch (const Error& e) {
            rec.check(false, [&] { return where() + ": " + e.what(); });
            continue;
          }
          rec.check(std::abs(sol.kraft_sum - 1.0) <= 1e-9,
                    [&] { return where() + ": Kraft sum " + fmt(sol.kraft_sum); });
          rec.check(sol.kkt_residual <= 1e-8,
                    [&] { return where() + ": stationarity residual " + fmt(sol.kkt_residual); });
          const auto& l = sol.lengths;
          rec.check(*std::min_element(l.begin(), l.end()) >= 0.0,
                    [&] { return where() + ": negative length"; });
          bool monotone = true;
          for (std::size_t i = 1; i < l.size(); ++i) monotone &= l[i] >= l[i - 1] - 1e-12;
          rec.check(monotone, [&] { return where() + ": lengths not monotone in probability"; });
        }
      }
    }
  }
}

std::vector<double> random_pmf(SplitMix64& rng, std::size_t k) {
  std::vector<double> p(k);
  double sum = 0.0;
  for (auto& x : p) {
    x = 0.02 + rng.uniform();
    sum += x;
  }
  for (auto& x : p) x /= sum;
  std::sort(p.begin(), p.end(), std::greater<>());
  return p;
}

void suite_bruteforce(Recorder& rec) {
  SplitMix64 rng(20240611);
  const PenaltyCase cases[] = {PenaltyCase::Edt, PenaltyCase::Ldt, PenaltyCase::Pdt};
  const double lambdas[] = {0.5, 1.0, 5.0, 10.0, 20.0};
  for (int t = 0; t < 20; ++t) {
    const std::size_t k = t % 2 == 0 ? 2 : 3;
    const auto p = random_pmf(rng, k);
    PenaltyConfig cfg;
    cfg.kind = cases[t % 3];
    const double lambda = lambdas[t % 5];
    const auto qf = quadratic_form(cfg, 1.0 / lambda);
    const auto sol = solve(qf, p);
    const double solver_obj = objective_at(qf, p, sol.lengths);
    const double oracle = grid_oracle_min(qf, p);
    rec.check(solver_obj <= oracle + 1e-3, [&] {
      return "trial " + std::to_string(t) + " (k=" + std::to_string(k) + ", " +
             std::string(to_string(cfg.kind)) + "): solver " + fmt(solver_obj) +
             " > oracle " + fmt(oracle);
    });
  }
}

void suite_renewal(Recorder& rec) {
  const auto pmf = zipf_pmf(100, 0.4);
  const auto source = truncate(pmf, 18);
  for (PenaltyCase c : {PenaltyCase::Edt, PenaltyCase::Ldt, PenaltyCase::Pdt}) {
    PenaltyConfig cfg;
    cfg.kind = c;
    const auto sol = optimize(cfg, source, 1.0);
    std::vector<double> qs;
    std::vector<double> predicted;
    for (std::uint64_t r = 0; r < 10; ++r) {
      SimConfig sim;
      sim.lambda = 1.0;
      sim.horizon = 2e4;
      sim.seed = 7 + r;
      const auto st = simulate(source, sol.lengths, cfg, sim).stats;
      const double gap = std::abs(st.time_avg_penalty - st.sum_q_over_T);
      rec.check(gap <= 1e-6 * (1.0 + std::abs(st.time_avg_penalty)), [&] {
        return std::string(to_string(c)) + " seed " + std::to_string(sim.seed) +
               ": time average " + fmt(st.time_avg_penalty) + " vs sum Q / T " +
               fmt(st.sum_q_over_T);
      });
      qs.push_back(st.mean_q);
      predicted.push_back(expected_q(cfg, st.mean_s, st.mean_s2, st.mean_w));
    }
    if (c != PenaltyCase::Pdt) continue;
    // Differences between the empirical and the plug-in analytic value,
    // spread measured across replications.
    double mean = 0.0;
    for (std::size_t i = 0; i < qs.size(); ++i) mean += qs[i] - predicted[i];
    mean /= static_cast<double>(qs.size());
    double var = 0.0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const double d = qs[i] - predicted[i] - mean;
      var += d * d;
    }
    const double se = std::sqrt(var / static_cast<double>(qs.size() - 1) /
                                static_cast<double>(qs.size()));
    rec.check(std::abs(mean) <= 3.0 * se + 1e-12, [&] {
      return "pdt mean Q differs from the exact area formula by " + fmt(mean) +
             " (se " + fmt(se) + ")";
    });
  }
}

void suite_simd(Recorder& rec) {
  if (!simd::isa_available(simd::Isa::Avx2)) {
    rec.check(true, [] { return std::string(); });
    return;
  }
  const auto& ref = simd::kernel_table(simd::Isa::Scalar);
  const auto& vec = simd::kernel_table(simd::Isa::Avx2);
  SplitMix64 rng(99);
  std::vector<double> t(1003), a(t.size()), b(t.size());
  for (auto& x : t) x = -60.0 + 160.0 * rng.uniform();
  ref.lambert_w0_exp(t.data(), a.data(), t.size());
  vec.lambert_w0_exp(t.data(), b.data(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double rel = std::abs(a[i] - b[i]) / std::max(std::abs(a[i]), 1e-300);
    rec.check(rel <= 1e-14, [&] { return "W0(exp(" + fmt(t[i]) + ")) differs by " + fmt(rel); });
  }
  std::vector<double> y(1003);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = i % 5 == 0 ? kBranchPoint * rng.uniform() : std::pow(10.0, -12.0 + 24.0 * rng.uniform());
  }
  ref.lambert_w0(y.data(), a.data(), y.size());
  vec.lambert_w0(y.data(), b.data(), y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double rel = std::abs(a[i] - b[i]) / std::max(std::abs(a[i]), 1e-300);
    rec.check(rel <= 1e-14, [&] { return "W0(" + fmt(y[i]) + ") differs by " + fmt(rel); });
  }
  for (std::size_t n : {0, 1, 3, 4, 7, 100, 1003}) {
    const double s_ref = ref.sum_exp_shifted(a.data(), n, 0.3);
    const double s_vec = vec.sum_exp_shifted(a.data(), n, 0.3);
    rec.check(std::abs(s_ref - s_vec) <= 1e-13 * std::max(1.0, std::abs(s_ref)),
              [&] { return "sum_exp_shifted n=" + std::to_string(n); });
    const auto m_ref = ref.weighted_moments(t.data(), a.data(), n);
    const auto m_vec = vec.weighted_moments(t.data(), a.data(), n);
    rec.check(std::abs(m_ref.mean - m_vec.mean) <= 1e-12 * std::max(1.0, std::abs(m_ref.mean)) &&
                  std::abs(m_ref.mean_sq - m_vec.mean_sq) <=
                      1e-12 * std::max(1.0, std::abs(m_ref.mean_sq)) &&
                  std::abs(m_ref.kraft - m_vec.kraft) <=
                      1e-12 * std::max(1.0, std::abs(m_ref.kraft)),
              [&] { return "weighted_moments n=" + std::to_string(n); });
  }
}

}  // namespace

const std::vector<std::string>& validation_suite_names() {
  static const std::vector<std::string> names = {"lambertw", "kkt", "bruteforce", "renewal",
                                                 "simd"};
  return names;
}

std::vector<SuiteResult> run_validation(const ValidationOptions& options) {
  const auto& all = validation_suite_names();
  for (const auto& s : options.suites) {
    if (std::find(all.begin(), all.end(), s) == all.end()) {
      fail(ErrorKind::Config, "unknown suite '" + s + "'");
    }
  }
  std::vector<SuiteResult> out;
  for (const auto& name : all) {
    if (!options.suites.empty() &&
        std::find(options.suites.begin(), options.suites.end(), name) ==
            options.suites.end()) {
      continue;
    }
    SuiteResult r;
    r.name = name;
    Recorder rec(r);
    const auto start = std::chrono::steady_clock::now();
    try {
      if (name == "lambertw") suite_lambertw(rec);
      if (name == "kkt") suite_kkt(rec, options.inject_fault);
      if (name == "bruteforce") suite_bruteforce(rec);
      if (name == "renewal") suite_renewal(rec);
      if (name == "simd") suite_simd(rec);
    } catch (const Error& e) {
      rec.check(false, [&] { return std::string("error: ") + e.what(); });
    }
    r.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.passed = r.first_failure.empty();
    out.push_back(std::move(r));
  }
  return out;
}

double grid_oracle_min(const QuadraticForm& qf, std::span<const double> probs,
                       double step, double max_len, double band) {
  const std::size_t k = probs.size();
  if (k < 1 || k > 3) fail(ErrorKind::InvalidParameter, "grid oracle supports k <= 3");
  const auto n = static_cast<std::size_t>(std::llround(max_len / step)) + 1;
  std::vector<double> len(n), pw(n);
  for (std::size_t i = 0; i < n; ++i) {
    len[i] = static_cast<double>(i) * step;
    pw[i] = std::exp2(-len[i]);
  }
  // Objective after shifting every length by log2(Kraft).
  auto score = [&](double kraft, double m1, double m2) {
    const double d = std::log2(kraft);
    return qf.evaluate(m1 + d, m2 + 2.0 * d * m1 + d * d);
  };
  auto in_band = [&](double kraft) { return std::abs(kraft - 1.0) <= band; };
  // Grid indices i with pw[i] in [lo, hi].
  auto index_range = [&](double lo, double hi) -> std::pair<std::size_t, std::size_t> {
    if (hi <= 0.0) return {1, 0};
    const double lmin = hi >= 1.0 ? 0.0 : -std::log2(hi);
    const double lmax = lo <= 0.0 ? max_len : -std::log2(lo);
    const auto a = static_cast<std::size_t>(std::max(0.0, std::floor(lmin / step) - 1.0));
    const auto b = static_cast<std::size_t>(
        std::min(static_cast<double>(n - 1), std::ceil(lmax / step) + 1.0));
    return {a, b};
  };

  double best = std::numeric_limits<double>::infinity();
  if (k == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      if (in_band(pw[i])) best = std::min(best, score(pw[i], len[i], len[i] * len[i]));
    }
    return best;
  }
  const double p1 = probs[0];
  const double p2 = probs[1];
  if (k == 2) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto [a, b] = index_range(1.0 - band - pw[i], 1.0 + band - pw[i]);
      for (std::size_t j = a; j <= b && j < n; ++j) {
        const double kr = pw[i] + pw[j];
        if (!in_band(kr)) continue;
        best = std::min(best, score(kr, p1 * len[i] + p2 * len[j],
                                    p1 * len[i] * len[i] + p2 * len[j] * len[j]));
      }
    }
    return best;
  }
  const double p3 = probs[2];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double partial = pw[i] + pw[j];
      if (partial > 1.0 + band) continue;
      const double m1 = p1 * len[i] + p2 * len[j];
      const double m2 = p1 * len[i] * len[i] + p2 * len[j] * len[j];
      const auto [a, b] = index_range(1.0 - band - partial, 1.0 + band - partial);
      for (std::size_t l = a; l <= b && l < n; ++l) {
        const double kr = partial + pw[l];
        if (!in_band(kr)) continue;
        best = std::min(best, score(kr, m1 + p3 * len[l], m2 + p3 * len[l] * len[l]));
      }
    }
  }
  return best;
}

}  // namespace semcode
