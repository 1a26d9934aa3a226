#include "semcode/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "semcode/codec.hpp"
#include "semcode/error.hpp"

namespace semcode {

namespace {

struct Accumulator {
  std::uint64_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sum_sq += x * x;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double second() const { return n ? sum_sq / static_cast<double>(n) : 0.0; }
  // Naive i.i.d. standard error; replication-level spreads are the
  // acceptance-grade estimate.
  double se() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) /
                                         static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

}  // namespace

void SimConfig::validate() const {
  if (!std::isfinite(lambda) || lambda <= 0.0) {
    fail(ErrorKind::InvalidParameter, "lambda must be finite and > 0");
  }
  if (!std::isfinite(horizon) || horizon <= 0.0) {
    fail(ErrorKind::InvalidParameter, "horizon must be finite and > 0");
  }
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    fail(ErrorKind::InvalidParameter, "warmup_fraction must be in [0, 1)");
  }
}

LinkModel LinkModel::from_source(const TruncatedSource& source,
                                 std::span<const double> lengths) {
  if (lengths.size() != source.k()) {
    fail(ErrorKind::InvalidParameter, "expected " + std::to_string(source.k()) +
                                          " lengths, got " +
                                          std::to_string(lengths.size()));
  }
  LinkModel link;
  const auto probs = source.parent().probs();
  link.parent_probs.assign(probs.begin(), probs.end());
  link.first_admitted = source.first_index();
  link.service.assign(lengths.begin(), lengths.end());
  return link;
}

SimResult simulate(const LinkModel& link, const PenaltyConfig& cfg,
                   const SimConfig& sim, bool keep_cycles) {
  sim.validate();
  cfg.validate();
  const std::size_t n = link.parent_probs.size();
  if (n == 0) fail(ErrorKind::InvalidParameter, "empty pmf");
  if (link.first_admitted > n || link.service.size() != n - link.first_admitted) {
    fail(ErrorKind::InvalidParameter, "service table does not match admitted set");
  }
  std::vector<double> service = link.service;
  if (sim.use_integer_lengths && !service.empty()) {
    const auto ints = integer_lengths(service);
    std::transform(ints.begin(), ints.end(), service.begin(),
                   [](unsigned l) { return static_cast<double>(l); });
  }
  for (double s : service) {
    if (!std::isfinite(s) || s < 0.0 || (s == 0.0 && service.size() > 1)) {
      fail(ErrorKind::InvalidParameter,
           "service times must be > 0 (0 only for a singleton alphabet)");
    }
  }

  std::vector<double> cdf(n);
  std::partial_sum(link.parent_probs.begin(), link.parent_probs.end(), cdf.begin());
  const double total = cdf.back();

  auto G = [&](double x) { return penalty_segment_integral(cfg, 0.0, x); };

  SplitMix64 rng(sim.seed);
  const double T = sim.horizon;
  const double warmup_end = sim.warmup_fraction * T;

  SimResult out;
  SimStats& st = out.stats;
  st.seed = sim.seed;
  st.horizon = T;

  double now = 0.0;   // time up to which the age curve has been integrated
  double gen = 0.0;   // generation time of the freshest delivered packet
  double area = 0.0;  // integral of g over [0, now], event by event
  double sum_q = 0.0;

  bool busy = false;
  double pending_gen = 0.0;
  double pending_done = 0.0;
  double pending_service = 0.0;

  double prev_gen = 0.0;      // a_{j-1}, fictitious a_0 = 0
  double prev_service = 0.0;  // s_{j-1}, fictitious s_0 = 0
  double prev_done = 0.0;     // d_{j-1}

  Accumulator acc_y, acc_w, acc_q, acc_s;

  auto advance = [&](double t) {
    if (t > now) {
      area += penalty_segment_integral(cfg, now - gen, t - now);
      now = t;
    }
  };

  auto deliver = [&]() {
    advance(pending_done);
    gen = pending_gen;
    busy = false;
    ++st.deliveries;
    CycleRecord rec;
    rec.y = pending_gen - prev_gen;
    rec.s = prev_service;
    rec.w = pending_gen - prev_done;
    rec.service = pending_service;
    rec.q_exact = G(rec.y + pending_service) - G(pending_service);
    sum_q += rec.q_exact;
    if (st.deliveries >= 2 && prev_gen >= warmup_end) {
      acc_y.add(rec.y);
      acc_w.add(rec.w);
      acc_q.add(rec.q_exact);
      acc_s.add(pending_service);
    }
    if (keep_cycles) out.cycles.push_back(rec);
    prev_gen = pending_gen;
    prev_service = pending_service;
    prev_done = pending_done;
  };

  const double inv_lambda = 1.0 / sim.lambda;
  double clock = 0.0;  // latest generation instant
  for (;;) {
    clock += -std::log1p(-rng.uniform()) * inv_lambda;
    if (busy && pending_done <= std::min(clock, T)) deliver();
    if (clock >= T) break;
    ++st.generated;
    const double u = rng.uniform() * total;
    const auto sym = static_cast<std::size_t>(
        std::min<std::ptrdiff_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                 static_cast<std::ptrdiff_t>(n - 1)));
    if (sym < link.first_admitted) continue;
    ++st.admitted;
    advance(clock);
    if (busy) {
      ++st.blocked;
      continue;
    }
    busy = true;
    pending_gen = clock;
    pending_service = service[sym - link.first_admitted];
    pending_done = clock + pending_service;
  }
  advance(T);

  st.time_avg_penalty = area / T;
  st.sum_q_over_T = (sum_q + G(T - gen)) / T;
  st.eta = st.deliveries > 0 ? static_cast<double>(st.deliveries - 1) / T : 0.0;
  st.cycles_used = acc_y.n;
  st.degenerate = acc_y.n == 0;
  if (st.degenerate) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    st.mean_y = st.mean_y2 = st.mean_s = st.mean_s2 = st.mean_w = st.mean_q = nan;
    st.se_y = st.se_w = st.se_q = st.empirical_j = nan;
    return out;
  }
  st.mean_y = acc_y.mean();
  st.mean_y2 = acc_y.second();
  st.mean_s = acc_s.mean();
  st.mean_s2 = acc_s.second();
  st.mean_w = acc_w.mean();
  st.mean_q = acc_q.mean();
  st.se_y = acc_y.se();
  st.se_w = acc_w.se();
  st.se_q = acc_q.se();
  st.empirical_j = st.mean_q + cfg.w * (cfg.alpha * st.mean_s + cfg.beta * st.mean_s2);
  return out;
}

SimResult simulate(const TruncatedSource& source, std::span<const double> lengths,
                   const PenaltyConfig& cfg, const SimConfig& sim, bool keep_cycles) {
  return simulate(LinkModel::from_source(source, lengths), cfg, sim, keep_cycles);
}

AnalyticComparison analytic_vs_empirical_report(const SimStats& stats,
                                                const CodewordSolution& solution,
                                                const PenaltyConfig& cfg,
                                                double gamma) {
  AnalyticComparison r;
  r.gamma = gamma;
  r.analytic_expected_q = expected_q(cfg, solution.mean, solution.mean_sq, gamma);
  r.analytic_mean_y = solution.mean + gamma;
  r.analytic_mean_y2 = solution.mean_sq + 2.0 * gamma * solution.mean + 2.0 * gamma * gamma;
  r.time_avg_penalty = stats.time_avg_penalty;
  r.eta = stats.eta;
  r.degenerate = stats.degenerate;
  if (stats.degenerate) return r;
  r.empirical_mean_q = stats.mean_q;
  r.empirical_se_q = stats.se_q;
  r.analytic_q_at_empirical = expected_q(cfg, stats.mean_s, stats.mean_s2, stats.mean_w);
  r.taylor_gap = std::abs(stats.mean_q - r.analytic_expected_q) / std::abs(stats.mean_q);
  r.eta_mean_q = stats.eta * stats.mean_q;
  r.mean_y = stats.mean_y;
  r.mean_y2 = stats.mean_y2;
  r.mean_w = stats.mean_w;
  r.inverse_mean_y = 1.0 / stats.mean_y;
  return r;
}

}  // namespace semcode
