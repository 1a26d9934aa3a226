#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace semcode::csv {

/// %.17g; NaN and infinities as nan/inf/-inf.
std::string format(double x);

/// Buffers rows and writes them in one go, so a failed run leaves no partial
/// file behind.
class Writer {
 public:
  explicit Writer(std::vector<std::string> header);

  Writer& cell(std::string_view text);
  Writer& cell(double x);
  Writer& cell(long long x);
  Writer& cell(unsigned long long x);
  Writer& cell(unsigned long x) { return cell(static_cast<unsigned long long>(x)); }
  Writer& cell(int x) { return cell(static_cast<long long>(x)); }
  Writer& cell(unsigned x) { return cell(static_cast<unsigned long long>(x)); }
  /// Ends the current row; throws if the cell count does not match the header.
  void end_row();

  const std::string& text() const noexcept { return text_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t columns_;
  std::size_t pending_ = 0;
  std::string text_;
};

/// Rows of a comma-separated file with a required header.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws Error{Config} if absent.
  std::size_t column(std::string_view name) const;
};

Table read(const std::filesystem::path& path);

double parse_double(const std::string& text, std::string_view what);

}  // namespace semcode::csv
