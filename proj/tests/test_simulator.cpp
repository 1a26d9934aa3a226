#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "semcode/error.hpp"
#include "semcode/length_optimizer.hpp"
#include "semcode/simulator.hpp"

using namespace semcode;

namespace {

PenaltyConfig pdt_unit() {
  PenaltyConfig cfg;
  cfg.kind = PenaltyCase::Pdt;
  cfg.rho = 1.0;
  return cfg;
}

bool same_stats(const SimStats& a, const SimStats& b) {
  auto eq = [](double x, double y) {
    return std::memcmp(&x, &y, sizeof x) == 0;
  };
  return a.generated == b.generated && a.admitted == b.admitted && a.blocked == b.blocked &&
         a.deliveries == b.deliveries && eq(a.mean_y, b.mean_y) && eq(a.mean_y2, b.mean_y2) &&
         eq(a.mean_s, b.mean_s) && eq(a.mean_w, b.mean_w) && eq(a.eta, b.eta) &&
         eq(a.time_avg_penalty, b.time_avg_penalty) && eq(a.empirical_j, b.empirical_j);
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("empty admitted set: age grows linearly") {
  LinkModel link;
  link.parent_probs = {1.0};
  link.first_admitted = 1;
  SimConfig sim;
  sim.lambda = 3.0;
  sim.horizon = 10.0;
  const auto st = simulate(link, pdt_unit(), sim).stats;
  CHECK(st.time_avg_penalty == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(st.sum_q_over_T == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(st.deliveries == 0);
  CHECK(st.admitted == 0);
  CHECK(st.generated > 0);
  CHECK(st.degenerate);
}

TEST_CASE("single symbol with back-to-back service") {
  // Age sweeps [1, 2] between deliveries, so the time average of a linear
  // penalty tends to (1 + 2) / 2.
  const auto source = truncate(uniform_pmf(1), 1);
  const double lengths[] = {1.0};
  SimConfig sim;
  sim.lambda = 1000.0;
  sim.horizon = 1e4;
  const auto st = simulate(source, lengths, pdt_unit(), sim).stats;
  CHECK(st.time_avg_penalty == doctest::Approx(1.5).epsilon(0.02));
  CHECK(st.mean_y == doctest::Approx(1.0).epsilon(0.01));
  CHECK(static_cast<double>(st.blocked) / st.admitted > 0.99);
  CHECK(static_cast<double>(st.deliveries) / sim.horizon == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("determinism") {
  const auto source = truncate(zipf_pmf(100, 0.4), 18);
  PenaltyConfig cfg;
  const auto sol = optimize(cfg, source, 1.0);
  SimConfig sim;
  sim.horizon = 2e4;
  sim.seed = 42;
  const auto a = simulate(source, sol.lengths, cfg, sim).stats;
  const auto b = simulate(source, sol.lengths, cfg, sim).stats;
  CHECK(same_stats(a, b));
  sim.seed = 43;
  CHECK_FALSE(same_stats(a, simulate(source, sol.lengths, cfg, sim).stats));
}

TEST_CASE("renewal-reward identity and cycle invariants") {
  SplitMix64 rng(8);
  for (int t = 0; t < 30; ++t) {
    PenaltyConfig cfg;
    cfg.kind = static_cast<PenaltyCase>(t % 3);
    cfg.rho = 0.1 + rng.uniform();
    const std::size_t k = 1 + static_cast<std::size_t>(40 * rng.uniform());
    const auto source = truncate(zipf_pmf(50, 0.8), std::min<std::size_t>(k, 50));
    const double lambda = 0.2 + 5 * rng.uniform();
    const auto sol = optimize(cfg, source, lambda);
    SimConfig sim;
    sim.lambda = lambda;
    sim.horizon = 5e3;
    sim.seed = 100 + t;
    const auto res = simulate(source, sol.lengths, cfg, sim, true);
    const auto& st = res.stats;
    CHECK(std::abs(st.time_avg_penalty - st.sum_q_over_T) <=
          1e-6 * (1.0 + std::abs(st.time_avg_penalty)));
    CHECK(st.deliveries <= st.admitted);
    CHECK(st.admitted <= st.generated);
    CHECK(st.blocked + st.deliveries <= st.admitted);
    CHECK(res.cycles.size() == st.deliveries);
    for (const auto& c : res.cycles) {
      CHECK(std::abs(c.y - (c.s + c.w)) <= 1e-12 * std::max(1.0, c.y));
      CHECK(c.y >= 0.0);
      CHECK(c.s >= 0.0);
      CHECK(c.w >= 0.0);
    }
  }
}

TEST_CASE("heavy load saturates the link") {
  const auto source = truncate(zipf_pmf(20, 0.5), 20);
  PenaltyConfig cfg;
  const auto sol = optimize(cfg, source, 1.0);
  SimConfig sim;
  sim.lambda = 500.0;
  sim.horizon = 2e3;
  const auto st = simulate(source, sol.lengths, cfg, sim).stats;
  CHECK(static_cast<double>(st.blocked) / static_cast<double>(st.admitted) > 0.99);
  CHECK(st.eta == doctest::Approx(1.0 / sol.mean).epsilon(0.03));
}

TEST_CASE("moment identities at moderate horizon") {
  const auto source = truncate(zipf_pmf(100, 0.4), 18);
  PenaltyConfig cfg;
  const auto sol = optimize(cfg, source, 1.0);
  const double gamma = mean_admitted_gap(1.0, source.q_k());
  SimConfig sim;
  sim.horizon = 3e5;
  sim.seed = 9;
  const auto st = simulate(source, sol.lengths, cfg, sim).stats;
  CHECK(st.mean_y == doctest::Approx(sol.mean + gamma).epsilon(0.02));
  CHECK(st.mean_w == doctest::Approx(gamma).epsilon(0.03));
  CHECK(st.mean_s == doctest::Approx(sol.mean).epsilon(0.01));
  CHECK(st.eta == doctest::Approx(1.0 / st.mean_y).epsilon(0.02));
}

TEST_CASE("integer lengths flag") {
  const auto source = truncate(zipf_pmf(100, 0.4), 18);
  PenaltyConfig cfg;
  const auto sol = optimize(cfg, source, 1.0);
  SimConfig sim;
  sim.horizon = 1e4;
  sim.use_integer_lengths = true;
  const auto res = simulate(source, sol.lengths, cfg, sim, true);
  for (const auto& c : res.cycles) CHECK(c.service == std::round(c.service));
}

TEST_CASE("analytic comparison report") {
  const auto source = truncate(zipf_pmf(100, 0.4), 18);
  const auto cfg = [] {
    PenaltyConfig c;
    c.kind = PenaltyCase::Pdt;
    return c;
  }();
  const auto sol = optimize(cfg, source, 1.0);
  const double gamma = mean_admitted_gap(1.0, source.q_k());
  SimConfig sim;
  sim.horizon = 1e5;
  const auto st = simulate(source, sol.lengths, cfg, sim).stats;
  const auto rep = analytic_vs_empirical_report(st, sol, cfg, gamma);
  CHECK_FALSE(rep.degenerate);
  CHECK(rep.analytic_mean_y == doctest::Approx(sol.mean + gamma));
  CHECK(rep.taylor_gap < 0.05);
  CHECK(std::abs(rep.empirical_mean_q - rep.analytic_q_at_empirical) <= 5 * rep.empirical_se_q);

  SimStats degenerate;
  degenerate.degenerate = true;
  CHECK(analytic_vs_empirical_report(degenerate, sol, cfg, gamma).degenerate);
}

TEST_CASE("config validation") {
  SimConfig sim;
  sim.lambda = 0.0;
  CHECK_THROWS_AS(sim.validate(), Error);
  sim.lambda = 1.0;
  sim.warmup_fraction = 1.0;
  CHECK_THROWS_AS(sim.validate(), Error);
  const auto source = truncate(zipf_pmf(10, 0.4), 3);
  const double wrong_arity[] = {1.0, 2.0};
  CHECK_THROWS_AS(LinkModel::from_source(source, wrong_arity), Error);
}

}
