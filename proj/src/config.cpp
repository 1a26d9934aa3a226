#include "semcode/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

#include "semcode/csv.hpp"
#include "semcode/error.hpp"

namespace semcode {

namespace {

// Numbers keep their source text so integer keys can reject "1.5".
struct Number {
  std::string text;
};
using Array = std::vector<Number>;
using Value = std::variant<std::string, Number, bool, Array>;

struct Entry {
  Value value;
  int line = 0;
};

using Document = std::map<std::string, std::map<std::string, Entry>>;

[[noreturn]] void syntax(const std::string& origin, int line, const std::string& what) {
  fail(ErrorKind::Config, origin + ":" + std::to_string(line) + ": " + what);
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

// Drops a trailing comment that is not inside a string.
std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

bool is_number_text(const std::string& s) {
  if (s.empty()) return false;
  double v;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

Value parse_value(const std::string& raw, const std::string& origin, int line) {
  const std::string s = trim(raw);
  if (s.empty()) syntax(origin, line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') syntax(origin, line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) {
        const char c = s[++i];
        out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
      } else {
        out += s[i];
      }
    }
    return out;
  }
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '[') {
    if (s.back() != ']') syntax(origin, line, "unterminated array");
    Array arr;
    std::istringstream is(s.substr(1, s.size() - 2));
    std::string item;
    while (std::getline(is, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;  // trailing comma
      std::erase(item, '_');
      if (!is_number_text(item)) syntax(origin, line, "arrays hold numbers only");
      arr.push_back({item});
    }
    return arr;
  }
  std::string num = s;
  std::erase(num, '_');
  if (num.front() == '+') num.erase(0, 1);
  if (!is_number_text(num)) syntax(origin, line, "cannot parse value '" + s + "'");
  return Number{num};
}

Document parse_document(const std::string& text, const std::string& origin) {
  Document doc;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') syntax(origin, line, "bad section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (section.empty()) syntax(origin, line, "empty section name");
      doc[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) syntax(origin, line, "expected key = value");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    if (key.empty()) syntax(origin, line, "empty key");
    auto& table = doc[section];
    if (table.count(key)) syntax(origin, line, "duplicate key '" + key + "'");
    table[key] = Entry{parse_value(s.substr(eq + 1), origin, line), line};
  }
  return doc;
}

class Reader {
 public:
  Reader(const std::string& origin, const std::string& section, const std::string& key,
         const Entry& e)
      : origin_(origin), name_(section + "." + key), e_(e) {}

  [[noreturn]] void bad(const std::string& what) const {
    syntax(origin_, e_.line, name_ + ": " + what);
  }

  std::string string() const {
    if (auto* v = std::get_if<std::string>(&e_.value)) return *v;
    bad("expected a string");
  }
  bool boolean() const {
    if (auto* v = std::get_if<bool>(&e_.value)) return *v;
    bad("expected true or false");
  }
  double number() const {
    if (auto* v = std::get_if<Number>(&e_.value)) return csv::parse_double(v->text, name_);
    bad("expected a number");
  }
  long long integer() const {
    if (auto* v = std::get_if<Number>(&e_.value)) return to_int(v->text);
    bad("expected an integer");
  }
  std::uint64_t unsigned64() const {
    if (auto* v = std::get_if<Number>(&e_.value)) {
      std::uint64_t out = 0;
      const auto r = std::from_chars(v->text.data(), v->text.data() + v->text.size(), out);
      if (r.ec == std::errc{} && r.ptr == v->text.data() + v->text.size()) return out;
    }
    bad("expected a non-negative 64-bit integer");
  }
  std::vector<double> numbers() const {
    auto* v = std::get_if<Array>(&e_.value);
    if (!v) bad("expected an array of numbers");
    std::vector<double> out;
    for (const auto& n : *v) out.push_back(csv::parse_double(n.text, name_));
    return out;
  }
  std::vector<std::size_t> counts() const {
    auto* v = std::get_if<Array>(&e_.value);
    if (!v) bad("expected an array of integers");
    std::vector<std::size_t> out;
    for (const auto& n : *v) {
      const long long x = to_int(n.text);
      if (x < 0) bad("values must be >= 0");
      out.push_back(static_cast<std::size_t>(x));
    }
    return out;
  }

 private:
  long long to_int(const std::string& text) const {
    long long out = 0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), out);
    if (r.ec != std::errc{} || r.ptr != text.data() + text.size()) bad("expected an integer");
    return out;
  }

  const std::string& origin_;
  std::string name_;
  const Entry& e_;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

template <typename T>
std::string array_text(const std::vector<T>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += csv::format(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out + "]";
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin,
                       RunConfig cfg) {
  const Document doc = parse_document(text, origin);
  for (const auto& [section, table] : doc) {
    for (const auto& [key, entry] : table) {
      const Reader r(origin, section, key, entry);
      auto count = [&] {
        const long long v = r.integer();
        if (v < 0) r.bad("must be >= 0");
        return static_cast<std::size_t>(v);
      };
      if (section == "source" && key == "pmf") {
        cfg.pmf = r.string();
      } else if (section == "penalty") {
        if (key == "case") {
          cfg.penalty.kind = parse_penalty_case(r.string());
        } else if (key == "rho") {
          cfg.penalty.rho = r.number();
        } else if (key == "kappa") {
          cfg.penalty.kappa = static_cast<int>(r.integer());
        } else if (key == "w") {
          cfg.penalty.w = r.number();
        } else if (key == "alpha") {
          cfg.penalty.alpha = r.number();
        } else if (key == "beta") {
          cfg.penalty.beta = r.number();
        } else if (key == "calibrate_w") {
          cfg.calibrate_w = r.boolean();
        } else {
          r.bad("unknown key");
        }
      } else if (section == "link") {
        if (key == "lambda") {
          cfg.lambda = r.number();
        } else if (key == "k") {
          cfg.k = count();
        } else {
          r.bad("unknown key");
        }
      } else if (section == "sim") {
        if (key == "horizon") {
          cfg.sim.horizon = r.number();
        } else if (key == "seed") {
          cfg.sim.seed = r.unsigned64();
        } else if (key == "warmup_fraction") {
          cfg.sim.warmup_fraction = r.number();
        } else if (key == "replications") {
          cfg.sim.replications = static_cast<int>(r.integer());
        } else if (key == "use_integer_lengths") {
          cfg.sim.use_integer_lengths = r.boolean();
        } else if (key == "lengths_file") {
          cfg.sim.lengths_file = r.string();
        } else {
          r.bad("unknown key");
        }
      } else if (section == "sweep") {
        if (key == "lambdas") {
          cfg.sweep.lambdas = r.numbers();
        } else if (key == "ks") {
          cfg.sweep.ks = r.counts();
        } else if (key == "cost_params") {
          cfg.sweep.cost_params = r.numbers();
        } else if (key == "k_ref") {
          cfg.sweep.k_ref = count();
        } else {
          r.bad("unknown key");
        }
      } else if (section == "run") {
        if (key == "out") {
          cfg.out = r.string();
        } else if (key == "jobs") {
          cfg.jobs = static_cast<unsigned>(count());
        } else {
          r.bad("unknown key");
        }
      } else if (section == "solver") {
        if (key == "kraft_tolerance") {
          cfg.solver.kraft_tolerance = r.number();
        } else if (key == "max_iterations") {
          cfg.solver.max_iterations = static_cast<int>(r.integer());
        } else if (key == "max_bracket_expansions") {
          cfg.solver.max_bracket_expansions = static_cast<int>(r.integer());
        } else if (key == "negative_length_tolerance") {
          cfg.solver.negative_length_tolerance = r.number();
        } else {
          r.bad("unknown key");
        }
      } else if (section == "source") {
        r.bad("unknown key");
      } else {
        fail(ErrorKind::Config, origin + ": unknown section [" + section + "]");
      }
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Config, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), std::move(base));
}

void RunConfig::validate() const {
  auto bad = [](const std::string& key, const std::string& what) {
    fail(ErrorKind::Config, key + " " + what);
  };
  if (pmf.empty()) bad("source.pmf", "must not be empty");
  if (!std::isfinite(penalty.rho) || penalty.rho < 0.0) bad("penalty.rho", "must be >= 0");
  if (penalty.kind == PenaltyCase::Ldt && penalty.rho == 0.0) {
    bad("penalty.rho", "must be > 0 for ldt");
  }
  if (penalty.kappa < 1) bad("penalty.kappa", "must be >= 1");
  if (!std::isfinite(penalty.w) || penalty.w <= 0.0) bad("penalty.w", "must be > 0");
  if (!std::isfinite(penalty.alpha) || penalty.alpha < 0.0) {
    bad("penalty.alpha", "must be >= 0");
  }
  if (!std::isfinite(penalty.beta) || penalty.beta < 0.0) bad("penalty.beta", "must be >= 0");
  if (!std::isfinite(lambda) || lambda <= 0.0) bad("link.lambda", "must be > 0");
  if (k && *k < 1) bad("link.k", "must be >= 1 (got " + std::to_string(*k) + ")");
  if (!std::isfinite(sim.horizon) || sim.horizon <= 0.0) bad("sim.horizon", "must be > 0");
  if (!(sim.warmup_fraction >= 0.0 && sim.warmup_fraction < 1.0)) {
    bad("sim.warmup_fraction", "must be in [0, 1)");
  }
  if (sim.replications < 1) bad("sim.replications", "must be >= 1");
  if (sweep.lambdas.empty()) bad("sweep.lambdas", "must not be empty");
  for (double l : sweep.lambdas) {
    if (!std::isfinite(l) || l <= 0.0) bad("sweep.lambdas", "values must be > 0");
  }
  for (std::size_t kk : sweep.ks) {
    if (kk < 1) bad("sweep.ks", "values must be >= 1");
  }
  for (double c : sweep.cost_params) {
    if (!std::isfinite(c) || c < 0.0) bad("sweep.cost_params", "values must be >= 0");
  }
  if (sweep.k_ref && *sweep.k_ref < 1) bad("sweep.k_ref", "must be >= 1");
  if (out.empty()) bad("run.out", "must not be empty");
  if (!(solver.kraft_tolerance > 0.0)) bad("solver.kraft_tolerance", "must be > 0");
  if (solver.max_iterations < 1) bad("solver.max_iterations", "must be >= 1");
  if (solver.max_bracket_expansions < 1) bad("solver.max_bracket_expansions", "must be >= 1");
  if (!(solver.negative_length_tolerance >= 0.0)) {
    bad("solver.negative_length_tolerance", "must be >= 0");
  }
}

std::string to_toml(const RunConfig& c) {
  std::ostringstream o;
  o << "[source]\n"
    << "pmf = " << quote(c.pmf) << "\n\n"
    << "[penalty]\n"
    << "case = " << quote(std::string(to_string(c.penalty.kind))) << '\n'
    << "rho = " << csv::format(c.penalty.rho) << '\n'
    << "kappa = " << c.penalty.kappa << '\n'
    << "w = " << csv::format(c.penalty.w) << '\n'
    << "alpha = " << csv::format(c.penalty.alpha) << '\n'
    << "beta = " << csv::format(c.penalty.beta) << '\n'
    << "calibrate_w = " << (c.calibrate_w ? "true" : "false") << "\n\n"
    << "[link]\n"
    << "lambda = " << csv::format(c.lambda) << '\n';
  if (c.k) o << "k = " << *c.k << '\n';
  o << "\n[sim]\n"
    << "horizon = " << csv::format(c.sim.horizon) << '\n'
    << "seed = " << c.sim.seed << '\n'
    << "warmup_fraction = " << csv::format(c.sim.warmup_fraction) << '\n'
    << "replications = " << c.sim.replications << '\n'
    << "use_integer_lengths = " << (c.sim.use_integer_lengths ? "true" : "false") << '\n'
    << "lengths_file = " << quote(c.sim.lengths_file) << "\n\n"
    << "[sweep]\n"
    << "lambdas = " << array_text(c.sweep.lambdas) << '\n'
    << "ks = " << array_text(c.sweep.ks) << '\n'
    << "cost_params = " << array_text(c.sweep.cost_params) << '\n';
  if (c.sweep.k_ref) o << "k_ref = " << *c.sweep.k_ref << '\n';
  o << "\n[run]\n"
    << "out = " << quote(c.out) << '\n'
    << "jobs = " << c.jobs << "\n\n"
    << "[solver]\n"
    << "kraft_tolerance = " << csv::format(c.solver.kraft_tolerance) << '\n'
    << "max_iterations = " << c.solver.max_iterations << '\n'
    << "max_bracket_expansions = " << c.solver.max_bracket_expansions << '\n'
    << "negative_length_tolerance = " << csv::format(c.solver.negative_length_tolerance)
    << '\n';
  return o.str();
}

}  // namespace semcode
