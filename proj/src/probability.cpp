#include "semcode/probability.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "semcode/error.hpp"

namespace semcode {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr double kRenormalizeTolerance = 1e-9;

// Neumaier summation; pmfs are short but we want the 1e-12 invariants to hold
// for n in the millions too.
double accurate_sum(std::span<const double> values) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

// Shortest text that round-trips.
std::string format_number(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

SourcePmf SourcePmf::from_probs(std::vector<double> probs, std::string label) {
  if (probs.empty()) {
    fail(ErrorKind::InvalidParameter, "pmf must have at least one symbol");
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!std::isfinite(probs[i]) || probs[i] <= 0.0 || probs[i] > 1.0) {
      fail(ErrorKind::InvalidParameter,
           "pmf entry " + std::to_string(i + 1) + " must be in (0,1], got " +
               format_number(probs[i]));
    }
    if (i > 0 && probs[i] > probs[i - 1]) {
      fail(ErrorKind::InvalidParameter,
           "pmf must be sorted non-increasing (entry " + std::to_string(i + 1) +
               ")");
    }
  }
  const double sum = accurate_sum(probs);
  const double err = std::abs(sum - 1.0);
  if (err > kRenormalizeTolerance) {
    fail(ErrorKind::InvalidParameter,
         "pmf sums to " + format_number(sum) + ", expected 1");
  }
  if (err > kSumTolerance) {
    for (double& p : probs) p /= sum;
  }
  return SourcePmf(std::move(probs), std::move(label),
                   std::numeric_limits<double>::quiet_NaN());
}

SourcePmf zipf_pmf(std::size_t n, double s) {
  if (n == 0) fail(ErrorKind::InvalidParameter, "zipf: n must be >= 1");
  if (!std::isfinite(s) || s < 0.0) {
    fail(ErrorKind::InvalidParameter, "zipf: exponent must be finite and >= 0");
  }
  std::vector<double> weights(n);
  for (std::size_t x = 1; x <= n; ++x) {
    weights[x - 1] = 1.0 / std::pow(static_cast<double>(x), s);
  }
  const double norm = accurate_sum(weights);
  for (double& w : weights) w /= norm;
  std::string label = "zipf(" + std::to_string(n) + "," + format_number(s) + ")";
  return SourcePmf(std::move(weights), std::move(label), s);
}

SourcePmf uniform_pmf(std::size_t n) {
  if (n == 0) fail(ErrorKind::InvalidParameter, "uniform: n must be >= 1");
  SourcePmf z = zipf_pmf(n, 0.0);
  return SourcePmf(std::move(z.probs_), "uniform(" + std::to_string(n) + ")", 0.0);
}

std::vector<std::size_t> TruncatedSource::indices() const {
  std::vector<std::size_t> out(k());
  std::iota(out.begin(), out.end(), first_index());
  return out;
}

TruncatedSource truncate(const SourcePmf& pmf, std::size_t k) {
  const std::size_t n = pmf.size();
  if (k == 0 || k > n) {
    fail(ErrorKind::InvalidParameter,
         "k must be in [1, " + std::to_string(n) + "], got " + std::to_string(k));
  }
  auto tail = pmf.probs().subspan(n - k);
  const double q_k = accurate_sum(tail);
  std::vector<double> cond(tail.begin(), tail.end());
  for (double& p : cond) p /= q_k;
  return TruncatedSource(std::make_shared<const SourcePmf>(pmf), q_k,
                         std::move(cond));
}

SourcePmf parse_pmf_spec(const std::string& spec) {
  auto parts = std::vector<std::string>{};
  {
    std::string cur;
    std::istringstream is(spec);
    while (std::getline(is, cur, ':')) parts.push_back(cur);
  }
  if (parts.empty()) fail(ErrorKind::Config, "empty pmf spec");
  auto parse_n = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(s, &pos);
      if (pos != s.size() || v <= 0) throw std::invalid_argument(s);
      return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      fail(ErrorKind::Config, "pmf: invalid symbol count '" + s + "'");
    }
  };
  if (parts[0] == "zipf" && parts.size() == 3) {
    double s = 0.0;
    try {
      std::size_t pos = 0;
      s = std::stod(parts[2], &pos);
      if (pos != parts[2].size()) throw std::invalid_argument(parts[2]);
    } catch (const std::exception&) {
      fail(ErrorKind::Config, "pmf: invalid zipf exponent '" + parts[2] + "'");
    }
    return zipf_pmf(parse_n(parts[1]), s);
  }
  if (parts[0] == "uniform" && parts.size() == 2) {
    return uniform_pmf(parse_n(parts[1]));
  }
  if (parts[0] == "file" && spec.size() > 5) {
    return load_pmf_csv(spec.substr(5));
  }
  fail(ErrorKind::Config, "pmf: expected zipf:N:S, uniform:N or file:PATH, got '" +
                              spec + "'");
}

SourcePmf load_pmf_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open pmf file " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Config, "pmf file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "index,prob") {
    fail(ErrorKind::Config, "pmf file header must be 'index,prob'");
  }
  std::vector<std::pair<double, long long>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      fail(ErrorKind::Config, "pmf file line " + std::to_string(line_no) +
                                  ": expected two columns");
    }
    try {
      const long long idx = std::stoll(line.substr(0, comma));
      const double p = std::stod(line.substr(comma + 1));
      rows.emplace_back(p, idx);
    } catch (const std::exception&) {
      fail(ErrorKind::Config,
           "pmf file line " + std::to_string(line_no) + ": unparsable row");
    }
  }
  // Descending by probability; stable on the file's index for ties.
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  std::vector<double> probs;
  probs.reserve(rows.size());
  std::string perm;
  for (const auto& [p, idx] : rows) {
    probs.push_back(p);
    if (!perm.empty()) perm += ' ';
    perm += std::to_string(idx);
  }
  return SourcePmf::from_probs(std::move(probs),
                               "file(" + path.filename().string() + ");order=" + perm);
}

double entropy_bits(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace semcode
