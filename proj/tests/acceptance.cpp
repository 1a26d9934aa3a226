// Acceptance run: one PASS/FAIL line per criterion, tolerances as specified.
// Usage: acceptance <path-to-semcode-cli>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "semcode/codec.hpp"
#include "semcode/error.hpp"
#include "semcode/experiments.hpp"
#include "semcode/lambert_w.hpp"
#include "semcode/length_optimizer.hpp"
#include "semcode/simulator.hpp"
#include "semcode/validation.hpp"

using namespace semcode;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string num(double x, int digits = 6) {
  std::ostringstream o;
  o.precision(digits);
  o << x;
  return o.str();
}

const PenaltyCase kCases[] = {PenaltyCase::Edt, PenaltyCase::Ldt, PenaltyCase::Pdt};
const double kLambdas[] = {0.5, 1.0, 5.0, 10.0, 20.0};

PenaltyConfig reference_penalty(PenaltyCase c) {
  PenaltyConfig cfg;
  cfg.kind = c;
  cfg.rho = 0.5;
  cfg.w = 1.0;
  cfg.alpha = 1.0;
  cfg.beta = 1.0;
  return cfg;
}

// 1. Lambert-W identity.
Verdict criterion_lambert() {
  Verdict v;
  const auto start = Clock::now();
  constexpr int kPositive = 1'000'000;
  std::vector<double> y(kPositive), w(kPositive);
  for (int i = 0; i < kPositive; ++i) y[i] = std::pow(10.0, -12.0 + 24.0 * i / (kPositive - 1));
  lambert_w0(y, w);
  double worst = 0.0;
  for (int i = 0; i < kPositive; ++i) {
    worst = std::max(worst, std::abs(w[i] * std::exp(w[i]) - y[i]) / y[i]);
  }
  for (int i = 0; i < 1000; ++i) {
    const double yy = kBranchPoint * (1.0 - i / 1000.0);
    const double ww = lambert_w0(yy);
    worst = std::max(worst, std::abs(ww * std::exp(ww) - yy) / std::abs(yy));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  v.pass = worst <= 1e-12 && secs < 5.0;
  v.detail = "max relative residual " + num(worst, 3) + " (limit 1e-12), " + num(secs, 3) +
             " s (limit 5 s)";
  return v;
}

// 2. KKT/Kraft grid.
Verdict criterion_kkt() {
  Verdict v;
  const auto start = Clock::now();
  const SourcePmf pmfs[] = {zipf_pmf(100, 0.4), uniform_pmf(100)};
  double worst_kraft = 0.0, worst_res = 0.0, min_len = INFINITY;
  int points = 0, failures = 0;
  std::string first;
  for (const auto& pmf : pmfs) {
    for (PenaltyCase c : kCases) {
      for (double lambda : kLambdas) {
        for (std::size_t k : {1, 2, 5, 10, 18, 50, 100}) {
          ++points;
          const std::string where = pmf.label() + "/" + std::string(to_string(c)) +
                                    "/lambda=" + num(lambda) + "/k=" + std::to_string(k);
          try {
            const auto sol = optimize(reference_penalty(c), truncate(pmf, k), lambda);
            const double dk = std::abs(sol.kraft_sum - 1.0);
            worst_kraft = std::max(worst_kraft, dk);
            worst_res = std::max(worst_res, sol.kkt_residual);
            const double lo = *std::min_element(sol.lengths.begin(), sol.lengths.end());
            min_len = std::min(min_len, lo);
            bool monotone = true;
            for (std::size_t i = 1; i < sol.lengths.size(); ++i) {
              monotone &= sol.lengths[i] >= sol.lengths[i - 1] - 1e-12;
            }
            if (dk > 1e-9 || sol.kkt_residual > 1e-8 || lo < 0.0 || !monotone) {
              if (failures++ == 0) first = where;
            }
          } catch (const Error& e) {
            if (failures++ == 0) first = where + ": " + e.what();
          }
        }
      }
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  v.pass = failures == 0 && secs < 2.0;
  v.detail = std::to_string(points) + " points, max |Kraft-1| " + num(worst_kraft, 3) +
             ", max residual " + num(worst_res, 3) + ", min length " + num(min_len, 4) +
             ", " + num(secs, 3) + " s (limit 2 s)";
  if (failures) v.detail += "; " + std::to_string(failures) + " failing, first " + first;
  return v;
}

// 3. Brute-force oracle.
Verdict criterion_bruteforce() {
  Verdict v;
  const auto start = Clock::now();
  SplitMix64 rng(31337);
  double worst_margin = -INFINITY;  // solver - oracle, must stay <= 1e-3
  for (int t = 0; t < 20; ++t) {
    const std::size_t k = t < 10 ? 2 : 3;
    std::vector<double> p(k);
    double s = 0.0;
    for (auto& x : p) s += (x = 0.01 + rng.uniform());
    for (auto& x : p) x /= s;
    std::sort(p.begin(), p.end(), std::greater<>());
    const auto cfg = reference_penalty(kCases[t % 3]);
    const double lambda = kLambdas[(t / 3) % 5];
    const auto qf = quadratic_form(cfg, 1.0 / lambda);
    const auto sol = solve(qf, p);
    const double margin = objective_at(qf, p, sol.lengths) - grid_oracle_min(qf, p);
    worst_margin = std::max(worst_margin, margin);
    if (margin > 1e-3) v.pass = false;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  v.pass = v.pass && secs < 60.0;
  v.detail = "20 pmfs, max (solver - oracle) " + num(worst_margin, 3) + " (limit 1e-3), " +
             num(secs, 3) + " s (limit 60 s)";
  return v;
}

struct Replicated {
  std::vector<SimStats> runs;
  double mean(double SimStats::*field) const {
    double s = 0.0;
    for (const auto& r : runs) s += r.*field;
    return s / static_cast<double>(runs.size());
  }
  double se(double SimStats::*field) const {
    const double m = mean(field);
    double ss = 0.0;
    for (const auto& r : runs) ss += (r.*field - m) * (r.*field - m);
    const double n = static_cast<double>(runs.size());
    return std::sqrt(ss / (n - 1.0) / n);
  }
};

Replicated replicate(const TruncatedSource& source, const std::vector<double>& lengths,
                     const PenaltyConfig& cfg, double lambda, double horizon, int reps,
                     std::uint64_t base_seed) {
  Replicated out;
  out.runs.resize(reps);
  const auto link = LinkModel::from_source(source, lengths);
  parallel_for(static_cast<std::size_t>(reps), 0, [&](std::size_t r) {
    SimConfig sim;
    sim.lambda = lambda;
    sim.horizon = horizon;
    sim.seed = base_seed + r;
    sim.warmup_fraction = 0.01;
    out.runs[r] = simulate(link, cfg, sim).stats;
  });
  return out;
}

double worst_renewal_gap(const Replicated& r) {
  double worst = 0.0;
  for (const auto& s : r.runs) {
    worst = std::max(worst, std::abs(s.time_avg_penalty - s.sum_q_over_T) /
                                (1.0 + std::abs(s.time_avg_penalty)));
  }
  return worst;
}

// 4 and 5 share the simulation runs.
std::pair<Verdict, Verdict> criteria_simulation() {
  Verdict v4, v5;
  const auto start = Clock::now();
  const auto source = truncate(zipf_pmf(100, 0.4), 18);
  const double lambda = 1.0;
  const double gamma = mean_admitted_gap(lambda, source.q_k());

  const auto edt = reference_penalty(PenaltyCase::Edt);
  const auto sol = optimize(edt, source, lambda);
  const auto runs = replicate(source, sol.lengths, edt, lambda, 1e6, 30, 1000);
  const double ey = runs.mean(&SimStats::mean_y);
  const double ey2 = runs.mean(&SimStats::mean_y2);
  const double ew = runs.mean(&SimStats::mean_w);
  const double ty = sol.mean + gamma;
  const double ty2 = sol.mean_sq + 2.0 * gamma * sol.mean + 2.0 * gamma * gamma;
  const double ry = std::abs(ey - ty) / ty;
  const double ry2 = std::abs(ey2 - ty2) / ty2;
  const double rw = std::abs(ew - gamma) / gamma;
  const double secs4 = std::chrono::duration<double>(Clock::now() - start).count();
  v4.pass = ry <= 0.01 && ry2 <= 0.03 && rw <= 0.03 && secs4 < 120.0;
  v4.detail = "E[Y] " + num(ey, 8) + " vs " + num(ty, 8) + " (rel " + num(ry, 3) +
              ", limit 1%); E[Y^2] " + num(ey2, 8) + " vs " + num(ty2, 8) + " (rel " +
              num(ry2, 3) + ", limit 3%); E[W] " + num(ew, 8) + " vs " + num(gamma, 8) +
              " (rel " + num(rw, 3) + ", limit 3%); " + num(secs4, 3) + " s (limit 120 s)";

  // Renewal-reward over every run here plus a PDT batch and an LDT batch.
  double worst = worst_renewal_gap(runs);
  const auto pdt = reference_penalty(PenaltyCase::Pdt);
  const auto pdt_sol = optimize(pdt, source, lambda);
  const auto pdt_runs = replicate(source, pdt_sol.lengths, pdt, lambda, 1e6, 30, 2000);
  worst = std::max(worst, worst_renewal_gap(pdt_runs));
  const auto ldt = reference_penalty(PenaltyCase::Ldt);
  const auto ldt_sol = optimize(ldt, source, lambda);
  worst = std::max(worst, worst_renewal_gap(
                              replicate(source, ldt_sol.lengths, ldt, lambda, 1e5, 10, 3000)));

  const double q = pdt_runs.mean(&SimStats::mean_q);
  const double q_se = pdt_runs.se(&SimStats::mean_q);
  const double q_formula =
      expected_q(pdt, pdt_runs.mean(&SimStats::mean_s), pdt_runs.mean(&SimStats::mean_s2),
                 pdt_runs.mean(&SimStats::mean_w));
  const double z = std::abs(q - q_formula) / q_se;
  v5.pass = worst <= 1e-6 && z <= 3.0;
  v5.detail = "max |time avg - sum Q/T| / (1+|time avg|) " + num(worst, 3) +
              " (limit 1e-6); PDT mean Q " + num(q, 8) + " vs area formula " +
              num(q_formula, 8) + ", " + num(z, 3) + " standard errors (limit 3)";
  return {v4, v5};
}

// 6. Taylor-gap report.
Verdict criterion_taylor_gap() {
  Verdict v;
  const auto pmf = zipf_pmf(100, 0.4);
  const auto cfg = reference_penalty(PenaltyCase::Edt);
  SweepSpec spec;
  spec.pmf = std::make_shared<const SourcePmf>(pmf);
  spec.penalty = cfg;
  struct Point {
    double lambda;
    std::size_t k;
  };
  std::vector<Point> points = {{1.0, 18}};
  for (double lambda : kLambdas) points.push_back({lambda, find_optimal_k(spec, lambda).k});

  std::printf("    Taylor-gap report (EDT rho=0.5, zipf(100,0.4), 10 x T=1e5):\n");
  std::printf("    %8s %5s %10s %16s %16s %10s\n", "lambda", "k", "rho*gamma", "analytic E[Q]",
              "simulated E[Q]", "rel gap");
  double worst = 0.0;
  for (const auto& pt : points) {
    const auto source = truncate(pmf, pt.k);
    const auto sol = optimize(cfg, source, pt.lambda);
    const double gamma = mean_admitted_gap(pt.lambda, source.q_k());
    const auto runs = replicate(source, sol.lengths, cfg, pt.lambda, 1e5, 10, 4000);
    const double emp = runs.mean(&SimStats::mean_q);
    const double gap = std::abs(emp - sol.expected_q) / std::abs(emp);
    worst = std::max(worst, gap);
    std::printf("    %8.3g %5zu %10.4g %16.8g %16.8g %10.4g\n", pt.lambda, pt.k,
                cfg.rho * gamma, sol.expected_q, emp, gap);
  }
  v.pass = worst < 0.15;
  v.detail = "report produced for " + std::to_string(points.size()) +
             " points, max relative gap " + num(worst, 4) + " (limit 0.15)";
  return v;
}

// 7. Trend reproduction.
Verdict criterion_trends() {
  Verdict v;
  const auto start = Clock::now();
  auto spec_for = [](PenaltyCase c, const SourcePmf& pmf) {
    SweepSpec s;
    s.pmf = std::make_shared<const SourcePmf>(pmf);
    s.penalty = reference_penalty(c);
    return s;
  };
  const auto zipf = zipf_pmf(100, 0.4);
  const auto edt = spec_for(PenaltyCase::Edt, zipf);
  const auto pdt = spec_for(PenaltyCase::Pdt, zipf);
  const double targets[] = {19.3, 13.2, 9.8, 7.0, 5.3};
  std::vector<std::size_t> ke, kp;
  for (double lambda : kLambdas) {
    ke.push_back(find_optimal_k(edt, lambda).k);
    kp.push_back(find_optimal_k(pdt, lambda).k);
  }
  bool a = true, b = true, c = true, d = true;
  for (std::size_t i = 0; i < 5; ++i) {
    a &= ke[i] > 1 && ke[i] < 100;
    if (i > 0) b &= ke[i] <= ke[i - 1];
    c &= ke[i] <= kp[i];
    d &= std::abs(static_cast<double>(kp[i]) - std::round(targets[i])) <= 2.0;
  }
  const auto uni = find_optimal_k(spec_for(PenaltyCase::Edt, uniform_pmf(100)), 10.0).k;
  const bool e = uni < ke[3];
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  auto list = [](const std::vector<std::size_t>& ks) {
    std::string s;
    for (std::size_t i = 0; i < ks.size(); ++i) s += (i ? "," : "") + std::to_string(ks[i]);
    return s;
  };
  v.pass = a && b && c && d && e && secs < 10.0;
  v.detail = std::string("(a) interior ") + (a ? "ok" : "FAIL") + ", (b) non-increasing " +
             (b ? "ok" : "FAIL") + ", (c) EDT<=PDT " + (c ? "ok" : "FAIL") +
             ", (d) PDT within 2 of 19,13,10,7,5 " + (d ? "ok" : "FAIL") +
             ", (e) uniform<zipf at lambda=10 " + (e ? "ok" : "FAIL") + "; EDT k*=[" +
             list(ke) + "], PDT k*=[" + list(kp) + "], uniform EDT k*(10)=" +
             std::to_string(uni) + "; " + num(secs, 3) + " s (limit 10 s)";
  return v;
}

// 8. Cost-parameter shape.
Verdict criterion_cost_shape() {
  Verdict v;
  const auto start = Clock::now();
  SweepSpec spec;
  spec.pmf = std::make_shared<const SourcePmf>(zipf_pmf(100, 0.4));
  spec.penalty = reference_penalty(PenaltyCase::Edt);
  spec.lambdas = {1.0};
  spec.ks = {2, 100};
  for (int i = 0; i <= 100; ++i) spec.cost_params.push_back(0.1 * i);
  const auto res = sweep_cost(spec);
  const std::size_t m = spec.cost_params.size();
  auto curve = [&](std::size_t block) {
    std::vector<double> j(m);
    for (std::size_t i = 0; i < m; ++i) j[i] = res.rows[block * m + i].j_soi;
    return j;
  };
  const auto j2 = curve(0);
  const auto j100 = curve(1);
  bool k2_ok = true;
  for (std::size_t i = 1; i < m; ++i) k2_ok &= j2[i] >= j2[i - 1];
  const auto peak = static_cast<std::size_t>(std::max_element(j100.begin(), j100.end()) -
                                             j100.begin());
  bool rise_fall = peak > 0 && peak + 1 < m;
  for (std::size_t i = 1; rise_fall && i <= peak; ++i) rise_fall &= j100[i] >= j100[i - 1];
  for (std::size_t i = peak + 1; rise_fall && i < m; ++i) rise_fall &= j100[i] <= j100[i - 1];
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  v.pass = k2_ok && rise_fall && secs < 30.0;
  v.detail = std::string("k=2 non-decreasing ") + (k2_ok ? "ok" : "FAIL") + " (J " +
             num(j2.front(), 8) + " -> " + num(j2.back(), 8) + "); k=100 rise-then-fall " +
             (rise_fall ? "ok" : "FAIL") + " (J " + num(j100.front(), 6) + " -> " +
             num(j100.back(), 6) + ", max at alpha=beta=" + num(spec.cost_params[peak]) +
             "); " + num(secs, 3) + " s (limit 30 s)";
  return v;
}

// 9. Codec.
Verdict criterion_codec() {
  Verdict v;
  SplitMix64 rng(4242);
  int failures = 0;
  std::string first;
  double worst_excess = -INFINITY;
  std::size_t total_symbols = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(199 * rng.uniform());
    const auto pmf = zipf_pmf(n, 1.5 * rng.uniform());
    const std::size_t k = 1 + static_cast<std::size_t>(static_cast<double>(n) * rng.uniform());
    const auto source = truncate(pmf, std::min(k, n));
    const double lambda = 0.5 + 20.0 * rng.uniform();
    auto note = [&](const std::string& what) {
      if (failures++ == 0) first = "trial " + std::to_string(t) + ": " + what;
    };
    CodewordSolution sol;
    try {
      sol = optimize(reference_penalty(kCases[t % 3]), source, lambda);
    } catch (const Error& e) {
      note(e.what());
      continue;
    }
    const auto ints = integer_lengths(sol.lengths);
    if (kraft_sum(ints) > 1.0) note("Kraft > 1");
    const auto book = build_codebook(ints);
    if (!is_prefix_free(book.codewords())) note("not prefix-free");
    double mean_int = 0.0;
    for (std::size_t i = 0; i < ints.size(); ++i) mean_int += source.cond_probs()[i] * ints[i];
    worst_excess = std::max(worst_excess, mean_int - sol.mean);
    if (!(mean_int - sol.mean < 1.0)) note("mean excess >= 1 bit");
    std::vector<std::size_t> msg(10000);
    for (auto& s : msg) s = static_cast<std::size_t>(rng.uniform() * book.size());
    total_symbols += msg.size();
    const auto bits = book.encode(msg);
    const auto back = book.size() == 1 && ints[0] == 0 ? book.decode(bits, msg.size())
                                                       : book.decode(bits);
    if (back != msg) note("round trip mismatch");
  }
  v.pass = failures == 0;
  v.detail = "1000 solver outputs, " + std::to_string(total_symbols) +
             " symbols round-tripped, max mean excess " + num(worst_excess, 4) +
             " bits (limit < 1)";
  if (failures) v.detail += "; " + std::to_string(failures) + " failing, first " + first;
  return v;
}

// 10. Determinism through the CLI.
int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict criterion_determinism(const std::string& cli) {
  Verdict v;
  const auto root = fs::temp_directory_path() / "semcode_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"optimize", "optimize --k 18 --lambda 1"},
      {"codebook", "codebook --k 18 --case ldt"},
      {"simulate", "simulate --k 18 --horizon 20000 --replications 4 --seed 9"},
      {"simulate_int", "simulate --k 10 --case pdt --horizon 20000 --integer-lengths"},
      {"sweep-k", "sweep-k --lambdas 1,10"},
      {"sweep-lambda", "sweep-lambda --ks 10,25,50,100 --lambdas 0.5,1,2,5,10,20"},
      {"sweep-cost", "sweep-cost --ks 2,18,100 --lambdas 1 --cost-params 0,2.5,5,10"},
      {"table1", "table1 --ks 2,18,100 --cost-params 0,1,10"},
  };
  int compared = 0;
  for (const auto& [name, args] : commands) {
    const auto a = root / (name + "_a");
    const auto b = root / (name + "_b");
    const auto c = root / (name + "_c");
    if (run_cli(cli, args + " --out " + a.string()) != 0 ||
        run_cli(cli, "--help >/dev/null; \"" + cli + "\" " + name.substr(0, name.find('_')) +
                         " --config " + (a / "config.toml").string() + " --out " +
                         b.string()) != 0 ||
        run_cli(cli, args + " --out " + c.string()) != 0) {
      v.pass = false;
      v.detail = name + ": command failed";
      return v;
    }
    for (const auto& entry : fs::directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      const auto file = entry.path().filename();
      ++compared;
      if (slurp(a / file) != slurp(b / file) || slurp(a / file) != slurp(c / file)) {
        v.pass = false;
        v.detail = name + ": " + file.string() + " differs";
        return v;
      }
    }
  }
  v.detail = std::to_string(commands.size()) + " commands, " + std::to_string(compared) +
             " CSVs byte-identical across a repeat run and a re-run from config.toml";
  fs::remove_all(root);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <semcode-cli>\n");
    return 2;
  }
  const std::string cli = argv[1];
  int failed = 0;
  auto report = [&](int id, const char* title, const std::function<Verdict()>& body) {
    Verdict v;
    try {
      v = body();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += v.pass ? 0 : 1;
    std::printf("criterion %2d %s  %s: %s\n", id, v.pass ? "PASS" : "FAIL", title,
                v.detail.c_str());
    std::fflush(stdout);
  };
  report(1, "Lambert-W identity", criterion_lambert);
  report(2, "KKT/Kraft grid", criterion_kkt);
  report(3, "brute-force oracle", criterion_bruteforce);
  std::pair<Verdict, Verdict> sim;
  bool sim_error = false;
  std::string sim_message;
  try {
    sim = criteria_simulation();
  } catch (const std::exception& e) {
    sim_error = true;
    sim_message = e.what();
  }
  report(4, "simulator moment identities", [&] {
    if (sim_error) throw std::runtime_error(sim_message);
    return sim.first;
  });
  report(5, "renewal-reward exactness", [&] {
    if (sim_error) throw std::runtime_error(sim_message);
    return sim.second;
  });
  report(6, "Taylor-gap report", criterion_taylor_gap);
  report(7, "trend reproduction", criterion_trends);
  report(8, "cost-parameter shape", criterion_cost_shape);
  report(9, "codec", criterion_codec);
  report(10, "determinism", [&] { return criterion_determinism(cli); });
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
