#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semcode/length_optimizer.hpp"
#include "semcode/timeliness.hpp"

namespace semcode {

struct SimSection {
  double horizon = 1e5;
  std::uint64_t seed = 1;
  double warmup_fraction = 0.01;
  int replications = 1;
  bool use_integer_lengths = false;
  std::string lengths_file;  // empty: solve for lengths
};

struct SweepSection {
  std::vector<double> lambdas = {0.5, 1.0, 5.0, 10.0, 20.0};
  std::vector<std::size_t> ks;  // empty: 1..n
  std::vector<double> cost_params = {0.0, 0.5, 1.0,  1.5, 2.0, 2.5, 3.0,
                                     3.5, 4.0, 4.5,  5.0, 5.5, 6.0, 6.5,
                                     7.0, 7.5, 8.0,  8.5, 9.0, 9.5, 10.0};
  std::optional<std::size_t> k_ref;  // calibration point, default n
};

/// Everything a subcommand needs. Serialized as a TOML subset: [section]
/// headers, `key = value` lines, strings, numbers, booleans, flat arrays,
/// `#` comments.
struct RunConfig {
  std::string pmf = "zipf:100:0.4";
  PenaltyConfig penalty;
  bool calibrate_w = false;
  double lambda = 1.0;
  std::optional<std::size_t> k;  // default n
  SimSection sim;
  SweepSection sweep;
  std::string out = "out";
  unsigned jobs = 0;
  SolverOptions solver;

  /// Range checks; throws Error{Config} naming the offending key.
  void validate() const;
};

/// Overlays the keys present in `text` onto `base`. Unknown sections or keys
/// and type mismatches throw Error{Config}.
RunConfig parse_config(const std::string& text, const std::string& origin,
                       RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Fully-resolved config, every key written, floats at 17 digits.
std::string to_toml(const RunConfig& cfg);

}  // namespace semcode
