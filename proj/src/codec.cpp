#include "semcode/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semcode/error.hpp"

namespace semcode {

namespace {

constexpr double kKraftSlack = 1e-9;
constexpr double kSnap = 1e-9;

// Exact Kraft test in units of 2^-63.
bool kraft_exceeds_one(std::span<const unsigned> lens) {
  const std::uint64_t one = std::uint64_t{1} << kMaxCodewordBits;
  std::uint64_t acc = 0;
  for (unsigned l : lens) {
    const std::uint64_t unit = one >> l;
    if (unit > one - acc) return true;
    acc += unit;
  }
  return false;
}

}  // namespace

BitString BitString::from_text(std::string_view bits) {
  BitString out;
  for (char c : bits) {
    if (c != '0' && c != '1') {
      fail(ErrorKind::InvalidParameter, "bit text may only contain 0 and 1");
    }
    out.append(c == '1' ? 1u : 0u, 1);
  }
  return out;
}

void BitString::append(std::uint64_t code, unsigned len) {
  for (unsigned b = len; b-- > 0;) {
    const std::size_t word = size_ >> 6;
    if (word == words_.size()) words_.push_back(0);
    if ((code >> b) & 1u) words_[word] |= std::uint64_t{1} << (63 - (size_ & 63));
    ++size_;
  }
}

std::string BitString::to_text() const {
  std::string out(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if ((*this)[i]) out[i] = '1';
  }
  return out;
}

std::string Codebook::codeword(std::size_t symbol) const {
  if (symbol >= size()) fail(ErrorKind::InvalidSymbol, "symbol out of range");
  std::string out(lengths_[symbol], '0');
  for (unsigned b = 0; b < lengths_[symbol]; ++b) {
    if ((codes_[symbol] >> (lengths_[symbol] - 1 - b)) & 1u) out[b] = '1';
  }
  return out;
}

std::vector<std::string> Codebook::codewords() const {
  std::vector<std::string> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(codeword(i));
  return out;
}

BitString Codebook::encode(std::span<const std::size_t> symbols) const {
  BitString bits;
  for (std::size_t s : symbols) {
    if (s >= size()) {
      fail(ErrorKind::InvalidSymbol, "symbol " + std::to_string(s) +
                                         " is outside the alphabet of size " +
                                         std::to_string(size()));
    }
    bits.append(codes_[s], lengths_[s]);
  }
  return bits;
}

std::vector<std::size_t> Codebook::decode(const BitString& bits,
                                          std::optional<std::size_t> count) const {
  if (size() == 1 && lengths_[0] == 0) {
    if (!bits.empty()) fail(ErrorKind::CorruptStream, "0-bit code with non-empty stream");
    if (!count) {
      fail(ErrorKind::InvalidParameter, "0-bit singleton code needs a symbol count");
    }
    return std::vector<std::size_t>(*count, 0);
  }
  std::vector<std::size_t> out;
  const std::size_t max_len = first_code_.size() - 1;
  std::size_t pos = 0;
  while (pos < bits.size()) {
    std::uint64_t code = 0;
    bool matched = false;
    for (std::size_t len = 1; len <= max_len; ++len) {
      if (pos >= bits.size()) break;
      code = (code << 1) | (bits[pos++] ? 1u : 0u);
      if (count_[len] != 0 && code >= first_code_[len] &&
          code - first_code_[len] < count_[len]) {
        out.push_back(sorted_symbols_[offset_[len] + (code - first_code_[len])]);
        matched = true;
        break;
      }
    }
    if (!matched) {
      fail(ErrorKind::CorruptStream,
           "undecodable bits ending at position " + std::to_string(pos));
    }
  }
  if (count && *count != out.size()) {
    fail(ErrorKind::CorruptStream, "decoded symbol count does not match");
  }
  return out;
}

std::vector<unsigned> integer_lengths(std::span<const double> real_lengths) {
  if (real_lengths.empty()) fail(ErrorKind::InvalidLengths, "no lengths given");
  double kraft = 0.0;
  for (double l : real_lengths) {
    if (!std::isfinite(l) || l < -kSnap) {
      fail(ErrorKind::InvalidLengths, "lengths must be finite and non-negative");
    }
    kraft += std::exp2(-l);
  }
  if (kraft > 1.0 + kKraftSlack) {
    fail(ErrorKind::InvalidLengths, "real lengths violate the Kraft inequality");
  }
  const unsigned floor_bits = real_lengths.size() >= 2 ? 1u : 0u;
  auto round_up = [&](double snap) {
    std::vector<unsigned> out;
    out.reserve(real_lengths.size());
    for (double l : real_lengths) {
      const double c = std::ceil(std::max(l - snap, 0.0));
      if (c > kMaxCodewordBits) {
        fail(ErrorKind::NumericRange, "codeword longer than 63 bits");
      }
      out.push_back(std::max(floor_bits, static_cast<unsigned>(c)));
    }
    return out;
  };
  auto out = round_up(kSnap);
  // Snapping can only break Kraft for very long words; plain ceil never does.
  if (kraft_exceeds_one(out)) out = round_up(0.0);
  return out;
}

Codebook build_codebook(std::span<const unsigned> int_lengths) {
  if (int_lengths.empty()) fail(ErrorKind::InvalidLengths, "no lengths given");
  for (unsigned l : int_lengths) {
    if (l > kMaxCodewordBits) fail(ErrorKind::InvalidLengths, "length above 63 bits");
    if (l == 0 && int_lengths.size() > 1) {
      fail(ErrorKind::InvalidLengths, "0-bit codeword in a multi-symbol alphabet");
    }
  }
  if (kraft_exceeds_one(int_lengths)) {
    fail(ErrorKind::InvalidLengths, "lengths violate the Kraft inequality");
  }

  Codebook book;
  const std::size_t k = int_lengths.size();
  book.lengths_.assign(int_lengths.begin(), int_lengths.end());
  book.codes_.assign(k, 0);
  book.sorted_symbols_.resize(k);
  std::iota(book.sorted_symbols_.begin(), book.sorted_symbols_.end(), 0);
  std::stable_sort(book.sorted_symbols_.begin(), book.sorted_symbols_.end(),
                   [&](std::size_t a, std::size_t b) {
                     return book.lengths_[a] < book.lengths_[b];
                   });

  const unsigned max_len = *std::max_element(int_lengths.begin(), int_lengths.end());
  book.first_code_.assign(max_len + 1, 0);
  book.count_.assign(max_len + 1, 0);
  book.offset_.assign(max_len + 1, 0);

  std::uint64_t code = 0;
  unsigned prev_len = book.lengths_[book.sorted_symbols_[0]];
  for (std::size_t rank = 0; rank < k; ++rank) {
    const std::size_t sym = book.sorted_symbols_[rank];
    const unsigned len = book.lengths_[sym];
    if (rank > 0) {
      ++code;
      code <<= (len - prev_len);
    }
    if (book.count_[len] == 0) {
      book.first_code_[len] = code;
      book.offset_[len] = rank;
    }
    ++book.count_[len];
    book.codes_[sym] = code;
    prev_len = len;
  }
  return book;
}

double kraft_sum(std::span<const unsigned> int_lengths) {
  double s = 0.0;
  for (unsigned l : int_lengths) s += std::ldexp(1.0, -static_cast<int>(l));
  return s;
}

bool is_prefix_free(std::span<const std::string> codewords) {
  for (std::size_t i = 0; i < codewords.size(); ++i) {
    for (std::size_t j = 0; j < codewords.size(); ++j) {
      if (i == j) continue;
      const auto& a = codewords[i];
      const auto& b = codewords[j];
      if (a.size() <= b.size() && b.compare(0, a.size(), a) == 0) return false;
    }
  }
  return true;
}

}  // namespace semcode
