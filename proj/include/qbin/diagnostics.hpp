#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbin/binning.hpp"

namespace qbin {

struct SymbolHistogram {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  static SymbolHistogram of(std::span<const std::uint16_t> symbols, std::size_t bins);
  std::size_t bin_count() const noexcept { return counts.size(); }
  std::vector<double> pmf() const;
};

/// -sum p log2 p over nonzero bins, in bits. Throws InsufficientDataError when empty.
double shannon_entropy_bits(const SymbolHistogram& hist);

/// Entropy divided by log2(N); 1 only for an exactly uniform histogram.
double shannon_entropy_per_bit(const SymbolHistogram& hist);

/// D_KL(p || uniform) in bits. Zero-probability entries contribute nothing.
double kl_to_uniform(std::span<const double> pmf);
double kl_to_uniform(const SymbolHistogram& hist);

/// Bin occupation when bins are cut for rate `theta_used` but the exponential
/// data follow `theta_true`: entry i = ((N-i)/N)^r - ((N-i-1)/N)^r, r = theta_used / theta_true.
std::vector<double> mismatch_pmf(double theta_used, double theta_true, std::size_t bins);

struct BiasDemo {
  double theta_low = 1.8;
  double theta_high = 2.0;
  std::vector<double> under;  // bins for theta_low, data at theta_high
  std::vector<double> over;   // bins for theta_high, data at theta_low
  double kl_under_bits = 0.0;
  double kl_over_bits = 0.0;

  /// Columns: k,uniform,under,over
  std::string csv() const;
};

BiasDemo bias_demo(double theta_low = 1.8, double theta_high = 2.0, std::size_t bins = 4);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t dof = 0;
};

/// Pearson test against the uniform expectation. Requires total >= 5N.
ChiSquareResult chi_square_uniformity(const SymbolHistogram& hist);

struct DiagnosticsReport {
  std::size_t bit_depth = 0;
  double entropy_bits = 0.0;
  double entropy_per_bit = 0.0;
  double kl_to_uniform_bits = 0.0;
  double acceptance_fraction = 0.0;
  std::size_t accepted = 0;
  std::size_t total_input = 0;
  std::optional<ChiSquareResult> chi_square;  // absent when the sample is too small
};

/// Histogram-based report over a symbol sequence. `total_input` is the number
/// of inputs the symbols were drawn from.
DiagnosticsReport diagnose(std::span<const std::uint16_t> symbols, int bit_depth, std::size_t total_input);
DiagnosticsReport diagnose(const SymbolStream& stream);

/// Symbols of one channel that were accepted, in log order.
std::vector<std::uint16_t> channel_symbols(std::span<const BinAssignment> log, Channel channel);

}  // namespace qbin
