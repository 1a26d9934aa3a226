#include "semcode/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "semcode/error.hpp"

namespace semcode::csv {

std::string format(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Writer::Writer(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += header[i];
  }
  text_ += '\n';
}

Writer& Writer::cell(std::string_view text) {
  if (pending_++) text_ += ',';
  text_ += text;
  return *this;
}

Writer& Writer::cell(double x) { return cell(std::string_view(format(x))); }
Writer& Writer::cell(long long x) { return cell(std::string_view(std::to_string(x))); }
Writer& Writer::cell(unsigned long long x) {
  return cell(std::string_view(std::to_string(x)));
}

void Writer::end_row() {
  if (pending_ != columns_) {
    fail(ErrorKind::Io, "csv row has " + std::to_string(pending_) + " cells, expected " +
                            std::to_string(columns_));
  }
  text_ += '\n';
  pending_ = 0;
}

void Writer::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << text_;
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  fail(ErrorKind::Config, "csv is missing column '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) {
    while (!cur.empty() && (cur.back() == '\r' || cur.back() == ' ')) cur.pop_back();
    std::size_t b = 0;
    while (b < cur.size() && cur[b] == ' ') ++b;
    out.push_back(cur.substr(b));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Config, path.string() + " is empty");
  t.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto row = split(line);
    if (row.size() != t.header.size()) {
      fail(ErrorKind::Config, path.string() + ":" + std::to_string(line_no) +
                                  ": expected " + std::to_string(t.header.size()) +
                                  " fields");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

double parse_double(const std::string& text, std::string_view what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    fail(ErrorKind::Config, std::string(what) + ": not a number: '" + text + "'");
  }
  return v;
}

}  // namespace semcode::csv
