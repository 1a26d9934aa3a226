#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "semcode/config.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = SEMCODE_CLI_PATH;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("semcode_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = "\"" + kCli + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const fs::path& p) {
  const auto text = slurp(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("optimize") {
  const auto out = scratch("opt");
  CHECK(run("optimize --pmf zipf:100:0.4 --case edt --rho 0.5 --lambda 1 --k 18 --alpha 1 "
            "--beta 1 --w 1 --out " + out.string()) == 0);
  CHECK(lines(out / "lengths.csv") == 19);
  CHECK(slurp(out / "lengths.csv").rfind("index,p_tilde,p_cond,length_real,length_int,codeword\n", 0) == 0);
  CHECK(fs::exists(out / "config.toml"));
}

TEST_CASE("exit codes") {
  const auto out = scratch("exit");
  CHECK(run("optimize --k 0 --out " + out.string()) == 2);
  CHECK(run("optimize --k 101 --out " + out.string()) == 2);
  CHECK(run("optimize --case pdt --kappa 2 --out " + out.string()) == 3);
  CHECK(run("optimize --case nope --out " + out.string()) == 2);
  CHECK(run("optimize --bogus-flag") == 2);
  CHECK(run("validate --suite nope") == 2);
  CHECK(run("validate --suite lambertw") == 0);
  CHECK(run("validate --suite kkt --inject-fault") == 1);
  CHECK(run("") == 2);
}

TEST_CASE("simulate is deterministic and aggregates replications") {
  const auto a = scratch("sim_a");
  const auto b = scratch("sim_b");
  const std::string args = "simulate --k 18 --lambda 1 --horizon 2000 --seed 5 --replications 30 ";
  CHECK(run(args + "--out " + a.string()) == 0);
  CHECK(run(args + "--jobs 3 --out " + b.string()) == 0);
  CHECK(slurp(a / "sim.csv") == slurp(b / "sim.csv"));
  CHECK(lines(a / "sim.csv") == 32);
  const auto sim = slurp(a / "sim.csv");
  CHECK(sim.rfind("seed,T,generated,admitted,blocked,deliveries,mean_y,mean_y2,mean_s,mean_w,"
                  "eta,time_avg_penalty,empirical_j\n", 0) == 0);
}

TEST_CASE("re-running from the resolved config reproduces the CSVs") {
  const auto a = scratch("rerun_a");
  const auto b = scratch("rerun_b");
  CHECK(run("sweep-k --case ldt --lambdas 1,10 --out " + a.string()) == 0);
  CHECK(run("sweep-k --config " + (a / "config.toml").string() + " --out " + b.string()) == 0);
  CHECK(slurp(a / "sweep_k.csv") == slurp(b / "sweep_k.csv"));
  CHECK(lines(a / "sweep_k.csv") == 201);
}

TEST_CASE("precedence: defaults < config file < SEMCODE_SEED < flags") {
  const auto dir = scratch("prec");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "in.toml");
    cfg << "[penalty]\nrho = 2\nw = 3\n[sim]\nseed = 11\n[link]\nk = 4\n";
  }
  const auto out = dir / "out";
  const std::string base = "optimize --config " + (dir / "in.toml").string() +
                           " --out " + out.string();
  auto resolved = [&] { return semcode::load_config(out / "config.toml"); };

  ::unsetenv("SEMCODE_SEED");
  CHECK(run(base + " --rho 3") == 0);
  auto cfg = resolved();
  CHECK(cfg.penalty.rho == 3.0);   // flag beats file
  CHECK(cfg.penalty.w == 3.0);     // file beats default
  CHECK(cfg.penalty.alpha == 1.0); // default
  CHECK(cfg.sim.seed == 11);

  ::setenv("SEMCODE_SEED", "77", 1);
  CHECK(run(base) == 0);
  CHECK(resolved().sim.seed == 77);  // env beats file
  CHECK(run(base + " --seed 99") == 0);
  CHECK(resolved().sim.seed == 99);  // flag beats env
  ::setenv("SEMCODE_SEED", "x", 1);
  CHECK(run(base) == 2);
  ::unsetenv("SEMCODE_SEED");
}

TEST_CASE("other subcommands write their files") {
  const auto out = scratch("others");
  const std::string o = " --out " + out.string();
  CHECK(run("codebook --k 18" + o) == 0);
  CHECK(lines(out / "codebook.csv") == 19);
  CHECK(run("sweep-lambda --ks 10,25,50,100" + o) == 0);
  CHECK(lines(out / "sweep_lambda.csv") == 21);
  CHECK(run("sweep-cost --ks 2,100 --lambdas 1 --cost-params 0,5,10" + o) == 0);
  CHECK(lines(out / "sweep_cost.csv") == 7);
  CHECK(run("table1 --ks 2,18,100 --cost-params 0,1,10" + o) == 0);
  CHECK(slurp(out / "table1.csv").rfind("lambda,k_star,costparam_star,J_SoI_star\n", 0) == 0);
  CHECK(lines(out / "table1.csv") == 6);
  CHECK(run("simulate --k 18 --horizon 100 --lengths-file " + (out / "nope.csv").string() + o) ==
        2);
}

}
