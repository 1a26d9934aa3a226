#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semcode {

/// Packed, append-only bit sequence (MSB-first within each codeword).
class BitString {
 public:
  BitString() = default;
  static BitString from_text(std::string_view bits);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  bool operator[](std::size_t i) const noexcept {
    return (words_[i >> 6] >> (63 - (i & 63))) & 1u;
  }
  /// Appends the low `len` bits of `code`, most significant first.
  void append(std::uint64_t code, unsigned len);
  std::string to_text() const;

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

/// Canonical prefix code over a truncated alphabet (symbols 0..k-1).
class Codebook {
 public:
  std::size_t size() const noexcept { return lengths_.size(); }
  std::span<const unsigned> lengths() const noexcept { return lengths_; }
  /// Codeword of `symbol` as 0/1 text ("" for the singleton 0-bit code).
  std::string codeword(std::size_t symbol) const;
  std::vector<std::string> codewords() const;
  std::uint64_t code_bits(std::size_t symbol) const { return codes_[symbol]; }

  BitString encode(std::span<const std::size_t> symbols) const;
  /// `count` is required only for the 0-bit singleton code, where the bit
  /// stream carries no length information.
  std::vector<std::size_t> decode(const BitString& bits,
                                  std::optional<std::size_t> count = {}) const;

 private:
  friend Codebook build_codebook(std::span<const unsigned> int_lengths);

  std::vector<unsigned> lengths_;
  std::vector<std::uint64_t> codes_;
  // Canonical decoding tables indexed by length.
  std::vector<std::uint64_t> first_code_;
  std::vector<std::size_t> count_;
  std::vector<std::size_t> offset_;
  std::vector<std::size_t> sorted_symbols_;
};

inline constexpr unsigned kMaxCodewordBits = 63;

/// Ceiling of each real length, snapping values within 1e-9 above an integer
/// down to it; at least one bit per symbol when k >= 2. Throws
/// Error{InvalidLengths} if the real lengths violate Kraft by more than 1e-9.
std::vector<unsigned> integer_lengths(std::span<const double> real_lengths);

/// Canonical code: shorter words first, lexicographic within a length, ties
/// ordered by symbol index. Throws Error{InvalidLengths} if Kraft > 1.
Codebook build_codebook(std::span<const unsigned> int_lengths);

/// sum 2^-l_i, exact for lengths up to 63 bits.
double kraft_sum(std::span<const unsigned> int_lengths);

/// Exhaustive pairwise prefix check.
bool is_prefix_free(std::span<const std::string> codewords);

}  // namespace semcode
