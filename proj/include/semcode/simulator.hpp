#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "semcode/length_optimizer.hpp"
#include "semcode/probability.hpp"
#include "semcode/timeliness.hpp"

namespace semcode {

struct SimConfig {
  double lambda = 1.0;
  double horizon = 1e6;  // T
  std::uint64_t seed = 1;
  double warmup_fraction = 0.01;
  bool use_integer_lengths = false;

  void validate() const;
};

/// One delivery cycle between consecutive delivered generation instants.
/// y = a_j - a_{j-1} splits into the previous packet's service time s and the
/// idle wait w = a_j - d_{j-1}. q_exact = G(y + s_j) - G(s_j) where s_j is the
/// service time of packet j and G(x) is the penalty integral over [0, x].
struct CycleRecord {
  double y = 0.0;
  double s = 0.0;
  double w = 0.0;
  double q_exact = 0.0;
  double service = 0.0;  // s_j
};

struct SimStats {
  std::uint64_t seed = 0;
  double horizon = 0.0;
  std::uint64_t generated = 0;
  std::uint64_t admitted = 0;
  std::uint64_t blocked = 0;
  std::uint64_t deliveries = 0;
  // Moments over cycles j >= 2 that start after the warm-up.
  std::uint64_t cycles_used = 0;
  double mean_y = 0.0;
  double mean_y2 = 0.0;
  double mean_s = 0.0;
  double mean_s2 = 0.0;
  double mean_w = 0.0;
  double mean_q = 0.0;
  double se_y = 0.0;
  double se_w = 0.0;
  double se_q = 0.0;
  double eta = 0.0;               // (N(T) - 1) / T
  double time_avg_penalty = 0.0;  // event-by-event integration of g
  double sum_q_over_T = 0.0;      // (sum Q_j + Q_inf) / T
  double empirical_j = 0.0;       // mean_q + w (alpha mean_s + beta mean_s2)
  bool degenerate = false;        // no usable cycles
};

struct SimResult {
  SimStats stats;
  std::vector<CycleRecord> cycles;  // every delivered cycle, j = 1..N
};

/// Link driven by the full parent pmf. Parent symbols first_admitted..n-1 are
/// admitted; service[i] is the service time of parent symbol first_admitted+i.
/// first_admitted == n gives an empty admitted set.
struct LinkModel {
  std::vector<double> parent_probs;
  std::size_t first_admitted = 0;
  std::vector<double> service;

  static LinkModel from_source(const TruncatedSource& source,
                               std::span<const double> lengths);
};

/// Bufferless blocking link with Poisson(lambda) generation. Deterministic for
/// a fixed seed.
SimResult simulate(const LinkModel& link, const PenaltyConfig& cfg,
                   const SimConfig& sim, bool keep_cycles = false);

SimResult simulate(const TruncatedSource& source, std::span<const double> lengths,
                   const PenaltyConfig& cfg, const SimConfig& sim,
                   bool keep_cycles = false);

struct AnalyticComparison {
  bool degenerate = false;
  double empirical_mean_q = 0.0;
  double empirical_se_q = 0.0;
  double analytic_expected_q = 0.0;  // at the solver's moments and gamma
  double analytic_q_at_empirical = 0.0;  // at mean_s, mean_s2, mean_w
  double taylor_gap = 0.0;               // |empirical - analytic| / empirical
  double eta_mean_q = 0.0;
  double time_avg_penalty = 0.0;
  double mean_y = 0.0;
  double analytic_mean_y = 0.0;   // E[L] + gamma
  double mean_y2 = 0.0;
  double analytic_mean_y2 = 0.0;  // E[L^2] + 2 gamma E[L] + 2 gamma^2
  double mean_w = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
  double inverse_mean_y = 0.0;
};

AnalyticComparison analytic_vs_empirical_report(const SimStats& stats,
                                                const CodewordSolution& solution,
                                                const PenaltyConfig& cfg,
                                                double gamma);

/// Counter-based SplitMix64 stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace semcode
