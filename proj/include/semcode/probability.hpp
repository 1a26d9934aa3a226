#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace semcode {

/// Finite pmf over n symbols, sorted non-increasing (p[0] is the most
/// probable symbol). Immutable once constructed.
class SourcePmf {
 public:
  /// Validates and adopts `probs`. The sum must be within 1e-9 of one; it is
  /// renormalized when it is off by more than 1e-12. Entries must be strictly
  /// positive and already sorted non-increasing.
  static SourcePmf from_probs(std::vector<double> probs, std::string label);

  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::string& label() const noexcept { return label_; }

  /// Zipf exponent when the pmf came from zipf_pmf/uniform_pmf, NaN otherwise.
  double zipf_exponent() const noexcept { return zipf_s_; }

 private:
  SourcePmf(std::vector<double> probs, std::string label, double zipf_s)
      : probs_(std::move(probs)), label_(std::move(label)), zipf_s_(zipf_s) {}

  friend SourcePmf zipf_pmf(std::size_t n, double s);
  friend SourcePmf uniform_pmf(std::size_t n);

  std::vector<double> probs_;
  std::string label_;
  double zipf_s_;
};

/// The k least probable symbols of a parent pmf, renormalized.
class TruncatedSource {
 public:
  const SourcePmf& parent() const noexcept { return *parent_; }
  std::size_t k() const noexcept { return cond_probs_.size(); }
  /// 0-based parent index of the first admitted symbol; admitted symbols are
  /// parent indices first_index() .. n-1.
  std::size_t first_index() const noexcept { return parent_->size() - k(); }
  std::vector<std::size_t> indices() const;
  double q_k() const noexcept { return q_k_; }
  std::span<const double> cond_probs() const noexcept { return cond_probs_; }

 private:
  TruncatedSource(std::shared_ptr<const SourcePmf> parent, double q_k,
                  std::vector<double> cond)
      : parent_(std::move(parent)), q_k_(q_k), cond_probs_(std::move(cond)) {}

  friend TruncatedSource truncate(const SourcePmf& pmf, std::size_t k);

  std::shared_ptr<const SourcePmf> parent_;
  double q_k_;
  std::vector<double> cond_probs_;
};

SourcePmf zipf_pmf(std::size_t n, double s);
SourcePmf uniform_pmf(std::size_t n);

/// Keeps parent indices n-k..n-1. Ties in probability are resolved by index.
TruncatedSource truncate(const SourcePmf& pmf, std::size_t k);

/// Parses "zipf:N:S", "uniform:N" or "file:PATH".
SourcePmf parse_pmf_spec(const std::string& spec);

/// CSV with header `index,prob`. Rows are sorted descending on load; the
/// applied permutation (original 1-based indices in sorted order) is appended
/// to the label.
SourcePmf load_pmf_csv(const std::filesystem::path& path);

/// Shannon entropy in bits.
double entropy_bits(std::span<const double> probs);

}  // namespace semcode
