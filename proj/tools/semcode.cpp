// Command-line front end. Exit codes: 0 success, 1 validation failure,
// 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "semcode/codec.hpp"
#include "semcode/config.hpp"
#include "semcode/csv.hpp"
#include "semcode/error.hpp"
#include "semcode/experiments.hpp"
#include "semcode/length_optimizer.hpp"
#include "semcode/probability.hpp"
#include "semcode/simulator.hpp"
#include "semcode/validation.hpp"

namespace fs = std::filesystem;
using namespace semcode;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// Flag values land here; only options that were given are applied on top of
// the config file.
struct Flags {
  std::string config;
  std::string pmf, kind, out, lengths_file;
  double rho = 0, w = 0, alpha = 0, beta = 0, lambda = 0, horizon = 0, warmup = 0;
  int kappa = 0, replications = 0;
  long long k = 0, k_ref = 0;
  unsigned jobs = 0;
  std::uint64_t seed = 0;
  bool integer_lengths = false, calibrate_w = false;
  std::vector<double> lambdas, cost_params;
  std::vector<long long> ks;

  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> setters;

  template <typename T>
  void add(CLI::App* app, const std::string& name, T& field, const std::string& help,
           std::function<void(RunConfig&)> apply) {
    setters.emplace_back(app->add_option(name, field, help), std::move(apply));
  }
  void add_flag(CLI::App* app, const std::string& name, bool& field, const std::string& help,
                std::function<void(RunConfig&)> apply) {
    setters.emplace_back(app->add_flag(name, field, help), std::move(apply));
  }
};

size_t checked_count(long long v, const std::string& key) {
  if (v < 0) fail(ErrorKind::Config, key + " must be >= 1 (got " + std::to_string(v) + ")");
  return static_cast<std::size_t>(v);
}

void register_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "TOML config; flags override its values");
  f.add(app, "--pmf", f.pmf, "zipf:N:S | uniform:N | file:PATH",
        [&f](RunConfig& c) { c.pmf = f.pmf; });
  f.add(app, "--case", f.kind, "edt | ldt | pdt",
        [&f](RunConfig& c) { c.penalty.kind = parse_penalty_case(f.kind); });
  f.add(app, "--rho", f.rho, "penalty rate", [&f](RunConfig& c) { c.penalty.rho = f.rho; });
  f.add(app, "--kappa", f.kappa, "PDT exponent",
        [&f](RunConfig& c) { c.penalty.kappa = f.kappa; });
  f.add(app, "--w", f.w, "coding-cost weight", [&f](RunConfig& c) { c.penalty.w = f.w; });
  f.add(app, "--alpha", f.alpha, "linear cost coefficient",
        [&f](RunConfig& c) { c.penalty.alpha = f.alpha; });
  f.add(app, "--beta", f.beta, "quadratic cost coefficient",
        [&f](RunConfig& c) { c.penalty.beta = f.beta; });
  f.add_flag(app, "--calibrate-w", f.calibrate_w, "balance E[Q] and the cost term at k_ref",
             [&f](RunConfig& c) { c.calibrate_w = f.calibrate_w; });
  f.add(app, "--lambda", f.lambda, "arrival rate",
        [&f](RunConfig& c) { c.lambda = f.lambda; });
  f.add(app, "--k", f.k, "number of admitted symbols",
        [&f](RunConfig& c) { c.k = checked_count(f.k, "link.k"); });
  f.add(app, "--horizon", f.horizon, "simulated time T",
        [&f](RunConfig& c) { c.sim.horizon = f.horizon; });
  f.add(app, "--seed", f.seed, "base seed (replication r uses seed + r)",
        [&f](RunConfig& c) { c.sim.seed = f.seed; });
  f.add(app, "--warmup", f.warmup, "warm-up fraction of the horizon",
        [&f](RunConfig& c) { c.sim.warmup_fraction = f.warmup; });
  f.add(app, "--replications", f.replications, "independent simulation runs",
        [&f](RunConfig& c) { c.sim.replications = f.replications; });
  f.add_flag(app, "--integer-lengths", f.integer_lengths, "simulate rounded-up lengths",
             [&f](RunConfig& c) { c.sim.use_integer_lengths = f.integer_lengths; });
  f.add(app, "--lengths-file", f.lengths_file, "lengths.csv from a previous optimize run",
        [&f](RunConfig& c) { c.sim.lengths_file = f.lengths_file; });
  auto* lam = app->add_option("--lambdas", f.lambdas, "lambda grid")->delimiter(',');
  f.setters.emplace_back(lam, [&f](RunConfig& c) { c.sweep.lambdas = f.lambdas; });
  auto* ks = app->add_option("--ks", f.ks, "k grid (default 1..n)")->delimiter(',');
  f.setters.emplace_back(ks, [&f](RunConfig& c) {
    c.sweep.ks.clear();
    for (long long v : f.ks) c.sweep.ks.push_back(checked_count(v, "sweep.ks"));
  });
  auto* cp = app->add_option("--cost-params", f.cost_params, "alpha = beta grid")
                 ->delimiter(',');
  f.setters.emplace_back(cp, [&f](RunConfig& c) { c.sweep.cost_params = f.cost_params; });
  f.add(app, "--k-ref", f.k_ref, "calibration point for --calibrate-w (default n)",
        [&f](RunConfig& c) { c.sweep.k_ref = checked_count(f.k_ref, "sweep.k_ref"); });
  f.add(app, "--out", f.out, "output directory", [&f](RunConfig& c) { c.out = f.out; });
  f.add(app, "--jobs", f.jobs, "worker threads (default: all cores)",
        [&f](RunConfig& c) { c.jobs = f.jobs; });
}

// defaults < config file < SEMCODE_SEED < flags
RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = load_config(f.config);
  if (const char* env = std::getenv("SEMCODE_SEED"); env && *env) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || *end != '\0' || env[0] == '-') {
      fail(ErrorKind::Config, std::string("SEMCODE_SEED is not a 64-bit integer: ") + env);
    }
    cfg.sim.seed = v;
  }
  for (const auto& [opt, apply] : f.setters) {
    if (opt->count() > 0) apply(cfg);
  }
  cfg.validate();
  return cfg;
}

struct Context {
  RunConfig cfg;
  std::shared_ptr<const SourcePmf> pmf;
  fs::path out;
};

Context prepare(const Flags& f, bool needs_k) {
  Context ctx;
  ctx.cfg = resolve(f);
  ctx.pmf = std::make_shared<const SourcePmf>(parse_pmf_spec(ctx.cfg.pmf));
  const std::size_t n = ctx.pmf->size();
  if (needs_k) {
    if (!ctx.cfg.k) ctx.cfg.k = n;
    if (*ctx.cfg.k > n) {
      fail(ErrorKind::Config, "link.k must be <= n = " + std::to_string(n) + " (got " +
                                  std::to_string(*ctx.cfg.k) + ")");
    }
  }
  for (std::size_t k : ctx.cfg.sweep.ks) {
    if (k > n) fail(ErrorKind::Config, "sweep.ks value " + std::to_string(k) + " exceeds n");
  }
  if (ctx.cfg.sweep.k_ref && *ctx.cfg.sweep.k_ref > n) {
    fail(ErrorKind::Config, "sweep.k_ref exceeds n");
  }
  ctx.out = ctx.cfg.out;
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + ctx.out.string() + ": " + ec.message());
  std::ofstream(ctx.out / "config.toml", std::ios::binary | std::ios::trunc)
      << to_toml(ctx.cfg);
  return ctx;
}

// Applies calibration when requested; returns the effective penalty.
PenaltyConfig effective_penalty(const Context& ctx) {
  PenaltyConfig pc = ctx.cfg.penalty;
  if (!ctx.cfg.calibrate_w) return pc;
  const std::size_t k_ref = ctx.cfg.sweep.k_ref.value_or(ctx.pmf->size());
  const auto cal = calibrate_w(*ctx.pmf, pc, ctx.cfg.lambda, k_ref, ctx.cfg.solver);
  std::cout << "calibrated w = " << csv::format(cal.w) << " at k_ref = " << k_ref
            << ", lambda = " << csv::format(ctx.cfg.lambda) << " (" << cal.iterations
            << " iterations)\n";
  pc.w = cal.w;
  return pc;
}

std::vector<std::string> sweep_header() {
  return {"case", "lambda", "n",   "s",   "w",        "alpha",     "beta",  "k",
          "q_k",  "mu",     "E_L", "E_L2", "E_Q", "cost_term", "J_SoI", "status"};
}

void sweep_cells(csv::Writer& w, const SweepRow& r) {
  w.cell(to_string(r.kind)).cell(r.lambda).cell(r.n).cell(r.s).cell(r.w).cell(r.alpha)
      .cell(r.beta).cell(r.k).cell(r.q_k).cell(r.mu).cell(r.mean).cell(r.mean_sq)
      .cell(r.expected_q).cell(r.cost_term).cell(r.j_soi).cell(r.status);
}

SweepSpec make_spec(const Context& ctx, const PenaltyConfig& pc) {
  SweepSpec spec;
  spec.pmf = ctx.pmf;
  spec.penalty = pc;
  spec.lambdas = ctx.cfg.sweep.lambdas;
  spec.ks = ctx.cfg.sweep.ks;
  spec.cost_params = ctx.cfg.sweep.cost_params;
  spec.solver = ctx.cfg.solver;
  spec.jobs = ctx.cfg.jobs;
  return spec;
}

std::vector<double> read_lengths(const fs::path& path, std::size_t k) {
  const auto t = csv::read(path);
  const std::size_t col = t.column("length_real");
  std::vector<double> out;
  for (const auto& row : t.rows) out.push_back(csv::parse_double(row[col], path.string()));
  if (out.size() != k) {
    fail(ErrorKind::Config, path.string() + " has " + std::to_string(out.size()) +
                                " lengths but k = " + std::to_string(k));
  }
  return out;
}

int cmd_optimize(const Flags& f) {
  const auto ctx = prepare(f, true);
  const auto pc = effective_penalty(ctx);
  const auto source = truncate(*ctx.pmf, *ctx.cfg.k);
  const auto sol = optimize(pc, source, ctx.cfg.lambda, ctx.cfg.solver);
  const auto ints = integer_lengths(sol.lengths);
  const auto book = build_codebook(ints);

  csv::Writer w({"index", "p_tilde", "p_cond", "length_real", "length_int", "codeword"});
  const auto idx = source.indices();
  for (std::size_t i = 0; i < source.k(); ++i) {
    w.cell(idx[i] + 1).cell(ctx.pmf->probs()[idx[i]]).cell(source.cond_probs()[i])
        .cell(sol.lengths[i]).cell(ints[i]).cell(book.codeword(i));
    w.end_row();
  }
  w.save(ctx.out / "lengths.csv");

  const double gamma = mean_admitted_gap(ctx.cfg.lambda, source.q_k());
  std::cout << "k            " << source.k() << '\n'
            << "q_k          " << csv::format(source.q_k()) << '\n'
            << "gamma        " << csv::format(gamma) << '\n'
            << "mu           " << csv::format(sol.mu) << '\n'
            << "E[L]         " << csv::format(sol.mean) << '\n'
            << "E[L^2]       " << csv::format(sol.mean_sq) << '\n'
            << "Kraft        " << csv::format(sol.kraft_sum)
            << (sol.kraft_slack ? "  (constraint slack, mu = 0)" : "") << '\n'
            << "KKT residual " << csv::format(sol.kkt_residual) << '\n'
            << "E[Q]         " << csv::format(sol.expected_q) << '\n'
            << "cost term    " << csv::format(sol.cost_term) << '\n'
            << "J_SoI        " << csv::format(sol.j_soi) << '\n';
  return 0;
}

int cmd_codebook(const Flags& f) {
  const auto ctx = prepare(f, true);
  const auto source = truncate(*ctx.pmf, *ctx.cfg.k);
  std::vector<double> real;
  if (!ctx.cfg.sim.lengths_file.empty()) {
    real = read_lengths(ctx.cfg.sim.lengths_file, source.k());
  } else {
    real = optimize(effective_penalty(ctx), source, ctx.cfg.lambda, ctx.cfg.solver).lengths;
  }
  const auto ints = integer_lengths(real);
  const auto book = build_codebook(ints);
  const auto words = book.codewords();
  if (!is_prefix_free(words)) fail(ErrorKind::ConstraintViolation, "codebook not prefix-free");

  csv::Writer w({"index", "length", "codeword"});
  const auto idx = source.indices();
  double mean_int = 0.0, mean_real = 0.0;
  for (std::size_t i = 0; i < source.k(); ++i) {
    w.cell(idx[i] + 1).cell(ints[i]).cell(words[i]);
    w.end_row();
    mean_int += source.cond_probs()[i] * ints[i];
    mean_real += source.cond_probs()[i] * real[i];
  }
  w.save(ctx.out / "codebook.csv");
  std::cout << "symbols           " << source.k() << '\n'
            << "Kraft (integer)   " << csv::format(kraft_sum(ints)) << '\n'
            << "mean length real  " << csv::format(mean_real) << '\n'
            << "mean length int   " << csv::format(mean_int) << '\n';
  return 0;
}

int cmd_simulate(const Flags& f) {
  const auto ctx = prepare(f, true);
  const auto pc = effective_penalty(ctx);
  const auto source = truncate(*ctx.pmf, *ctx.cfg.k);
  const auto sol = optimize(pc, source, ctx.cfg.lambda, ctx.cfg.solver);
  const auto lengths = ctx.cfg.sim.lengths_file.empty()
                           ? sol.lengths
                           : read_lengths(ctx.cfg.sim.lengths_file, source.k());
  const auto link = LinkModel::from_source(source, lengths);

  const auto reps = static_cast<std::size_t>(ctx.cfg.sim.replications);
  std::vector<SimStats> stats(reps);
  parallel_for(reps, ctx.cfg.jobs, [&](std::size_t r) {
    SimConfig sim;
    sim.lambda = ctx.cfg.lambda;
    sim.horizon = ctx.cfg.sim.horizon;
    sim.seed = ctx.cfg.sim.seed + r;
    sim.warmup_fraction = ctx.cfg.sim.warmup_fraction;
    sim.use_integer_lengths = ctx.cfg.sim.use_integer_lengths;
    stats[r] = simulate(link, pc, sim).stats;
  });

  csv::Writer w({"seed", "T", "generated", "admitted", "blocked", "deliveries", "mean_y",
                 "mean_y2", "mean_s", "mean_w", "eta", "time_avg_penalty", "empirical_j"});
  for (const auto& s : stats) {
    w.cell(s.seed).cell(s.horizon).cell(s.generated).cell(s.admitted).cell(s.blocked)
        .cell(s.deliveries).cell(s.mean_y).cell(s.mean_y2).cell(s.mean_s).cell(s.mean_w)
        .cell(s.eta).cell(s.time_avg_penalty).cell(s.empirical_j);
    w.end_row();
  }
  if (reps > 1) {
    auto avg = [&](auto field) {
      double sum = 0.0;
      for (const auto& s : stats) sum += static_cast<double>(field(s));
      return sum / static_cast<double>(reps);
    };
    w.cell("mean").cell(ctx.cfg.sim.horizon)
        .cell(avg([](const SimStats& s) { return s.generated; }))
        .cell(avg([](const SimStats& s) { return s.admitted; }))
        .cell(avg([](const SimStats& s) { return s.blocked; }))
        .cell(avg([](const SimStats& s) { return s.deliveries; }))
        .cell(avg([](const SimStats& s) { return s.mean_y; }))
        .cell(avg([](const SimStats& s) { return s.mean_y2; }))
        .cell(avg([](const SimStats& s) { return s.mean_s; }))
        .cell(avg([](const SimStats& s) { return s.mean_w; }))
        .cell(avg([](const SimStats& s) { return s.eta; }))
        .cell(avg([](const SimStats& s) { return s.time_avg_penalty; }))
        .cell(avg([](const SimStats& s) { return s.empirical_j; }));
    w.end_row();
  }
  w.save(ctx.out / "sim.csv");

  // Side-by-side report for the first replication.
  const double gamma = mean_admitted_gap(ctx.cfg.lambda, source.q_k());
  const auto rep = analytic_vs_empirical_report(stats.front(), sol, pc, gamma);
  csv::Writer cmp({"quantity", "empirical", "analytic"});
  auto line = [&](const char* name, double emp, double ana) {
    cmp.cell(name).cell(emp).cell(ana);
    cmp.end_row();
    std::cout << name << ": empirical " << csv::format(emp) << ", analytic "
              << csv::format(ana) << '\n';
  };
  if (rep.degenerate) {
    std::cout << "no usable delivery cycles; comparison skipped\n";
  } else {
    line("mean_y", rep.mean_y, rep.analytic_mean_y);
    line("mean_y2", rep.mean_y2, rep.analytic_mean_y2);
    line("mean_w", rep.mean_w, rep.gamma);
    line("eta", rep.eta, rep.inverse_mean_y);
    line("mean_q", rep.empirical_mean_q, rep.analytic_expected_q);
    line("mean_q_plugin", rep.empirical_mean_q, rep.analytic_q_at_empirical);
    line("time_avg_penalty", rep.time_avg_penalty, rep.eta_mean_q);
    std::cout << "relative gap of analytic E[Q]: " << csv::format(rep.taylor_gap) << '\n';
  }
  cmp.save(ctx.out / "compare.csv");
  return 0;
}

int cmd_sweep_k(const Flags& f) {
  const auto ctx = prepare(f, false);
  const auto spec = make_spec(ctx, effective_penalty(ctx));
  auto lambdas = spec.lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  csv::Writer w(sweep_header());
  for (double lambda : lambdas) {
    const auto res = sweep_k(spec, lambda);
    for (const auto& r : res.rows) {
      sweep_cells(w, r);
      w.end_row();
    }
    if (res.argmin) {
      const auto& r = res.rows[*res.argmin];
      std::cout << "lambda " << csv::format(lambda) << ": k* = " << r.k
                << ", J_SoI = " << csv::format(r.j_soi) << '\n';
    } else {
      std::cout << "lambda " << csv::format(lambda) << ": every point failed\n";
    }
  }
  w.save(ctx.out / "sweep_k.csv");
  return 0;
}

int cmd_sweep_lambda(const Flags& f) {
  const auto ctx = prepare(f, false);
  const auto spec = make_spec(ctx, effective_penalty(ctx));
  const auto res = sweep_lambda(spec);
  auto header = sweep_header();
  header.push_back("is_k_min");
  csv::Writer w(header);
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    sweep_cells(w, res.rows[i]);
    w.cell(res.is_k_min[i] ? 1 : 0);
    w.end_row();
    if (res.is_k_min[i]) {
      std::cout << "k " << res.rows[i].k << ": lambda* = " << csv::format(res.rows[i].lambda)
                << ", J_SoI = " << csv::format(res.rows[i].j_soi) << '\n';
    }
  }
  w.save(ctx.out / "sweep_lambda.csv");
  return 0;
}

void write_table1(const SweepCostResult& res, const fs::path& path) {
  csv::Writer t({"lambda", "k_star", "costparam_star", "J_SoI_star"});
  for (const auto& row : res.table) {
    t.cell(row.lambda).cell(row.k_star).cell(row.cost_star).cell(row.j_star);
    t.end_row();
    std::cout << "lambda " << csv::format(row.lambda) << ": k* = " << row.k_star
              << ", alpha=beta* = " << csv::format(row.cost_star)
              << ", J_SoI* = " << csv::format(row.j_star) << '\n';
  }
  t.save(path);
  std::cout << "note: J_SoI is non-decreasing in alpha=beta at fixed k, so the joint "
               "argmin sits at the smallest cost value on the grid\n";
}

int cmd_sweep_cost(const Flags& f) {
  const auto ctx = prepare(f, false);
  const auto res = sweep_cost(make_spec(ctx, effective_penalty(ctx)));
  csv::Writer w(sweep_header());
  for (const auto& r : res.rows) {
    sweep_cells(w, r);
    w.end_row();
  }
  w.save(ctx.out / "sweep_cost.csv");
  write_table1(res, ctx.out / "table1.csv");
  return 0;
}

int cmd_table1(const Flags& f) {
  const auto ctx = prepare(f, false);
  write_table1(sweep_cost(make_spec(ctx, effective_penalty(ctx))), ctx.out / "table1.csv");
  return 0;
}

int cmd_validate(const std::vector<std::string>& suites, bool inject_fault) {
  ValidationOptions opts;
  opts.suites = suites;
  opts.inject_fault = inject_fault;
  const auto results = run_validation(opts);
  bool all = true;
  for (const auto& r : results) {
    std::printf("%-11s %s  %zu cases  %.2fs\n", r.name.c_str(), r.passed ? "PASS" : "FAIL",
                r.cases, r.seconds);
    if (!r.passed) {
      std::printf("  first failure: %s\n", r.first_failure.c_str());
      all = false;
    }
  }
  return all ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Timeliness-aware codeword length design and link simulation"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const Flags&);
  };
  const Sub subs[] = {
      {"optimize", "solve for real codeword lengths; writes lengths.csv", cmd_optimize},
      {"codebook", "round lengths and build a canonical code; writes codebook.csv",
       cmd_codebook},
      {"simulate", "simulate the blocking link; writes sim.csv and compare.csv", cmd_simulate},
      {"sweep-k", "J_SoI against k for each lambda; writes sweep_k.csv", cmd_sweep_k},
      {"sweep-lambda", "J_SoI against lambda for each k; writes sweep_lambda.csv",
       cmd_sweep_lambda},
      {"sweep-cost", "J_SoI over k and alpha=beta; writes sweep_cost.csv and table1.csv",
       cmd_sweep_cost},
      {"table1", "joint (k, alpha=beta) argmin per lambda; writes table1.csv", cmd_table1},
  };
  std::vector<std::unique_ptr<Flags>> flags;
  std::vector<std::pair<CLI::App*, const Sub*>> commands;
  for (const auto& s : subs) {
    auto* sc = app.add_subcommand(s.name, s.help);
    flags.push_back(std::make_unique<Flags>());
    register_common(sc, *flags.back());
    commands.emplace_back(sc, &s);
  }
  std::vector<std::string> suites;
  bool inject_fault = false;
  auto* validate = app.add_subcommand("validate", "run the self-check suites");
  validate->add_option("--suite", suites, "suite to run (repeatable)")
      ->check(CLI::IsMember(validation_suite_names()));
  validate->add_flag("--inject-fault", inject_fault,
                     "perturb the multiplier by 1e-3 (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (validate->parsed()) return cmd_validate(suites, inject_fault);
    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (commands[i].first->parsed()) return commands[i].second->run(*flags[i]);
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.is_numerical() ? kExitNumerical : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitConfig;
}
