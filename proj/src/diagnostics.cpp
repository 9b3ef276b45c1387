#include "qbin/diagnostics.hpp"

#include <cmath>
#include <sstream>
#include <iomanip>

#include "qbin/errors.hpp"
#include "qbin/special_functions.hpp"

namespace qbin {

SymbolHistogram SymbolHistogram::of(std::span<const std::uint16_t> symbols, std::size_t bins) {
  SymbolHistogram hist;
  hist.counts.assign(bins, 0);
  for (const std::uint16_t s : symbols) {
    if (s >= bins) {
      throw ContractError("symbol " + std::to_string(s) + " outside histogram of " + std::to_string(bins) + " bins");
    }
    ++hist.counts[s];
  }
  hist.total = symbols.size();
  return hist;
}

std::vector<double> SymbolHistogram::pmf() const {
  if (total == 0) {
    throw InsufficientDataError("empty histogram has no distribution");
  }
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return p;
}

double shannon_entropy_bits(const SymbolHistogram& hist) {
  double h = 0.0;
  for (const double p : hist.pmf()) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

double shannon_entropy_per_bit(const SymbolHistogram& hist) {
  if (hist.bin_count() < 2) {
    throw ContractError("entropy per bit needs at least 2 bins");
  }
  return shannon_entropy_bits(hist) / std::log2(static_cast<double>(hist.bin_count()));
}

double kl_to_uniform(std::span<const double> pmf) {
  if (pmf.empty()) {
    throw ContractError("kl_to_uniform: empty distribution");
  }
  double sum = 0.0;
  for (const double p : pmf) {
    if (p < 0.0) throw ContractError("kl_to_uniform: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ContractError("kl_to_uniform: distribution sums to " + std::to_string(sum));
  }
  const auto bins = static_cast<double>(pmf.size());
  double kl = 0.0;
  for (const double p : pmf) {
    if (p > 0.0) kl += p * std::log2(p * bins);
  }
  return std::max(kl, 0.0);
}

double kl_to_uniform(const SymbolHistogram& hist) {
  const std::vector<double> p = hist.pmf();
  return kl_to_uniform(p);
}

std::vector<double> mismatch_pmf(double theta_used, double theta_true, std::size_t bins) {
  if (!(theta_used > 0.0) || !(theta_true > 0.0) || !std::isfinite(theta_used) || !std::isfinite(theta_true)) {
    throw DomainError("mismatch_pmf: rates must be positive and finite");
  }
  if (bins < 2) {
    throw ContractError("mismatch_pmf: need at least 2 bins");
  }
  const double r = theta_used / theta_true;
  const auto n = static_cast<double>(bins);
  std::vector<double> pmf(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    const double hi = (n - static_cast<double>(i)) / n;
    const double lo = (n - static_cast<double>(i) - 1.0) / n;
    pmf[i] = std::pow(hi, r) - (lo > 0.0 ? std::pow(lo, r) : 0.0);
  }
  return pmf;
}

BiasDemo bias_demo(double theta_low, double theta_high, std::size_t bins) {
  BiasDemo demo;
  demo.theta_low = theta_low;
  demo.theta_high = theta_high;
  demo.under = mismatch_pmf(theta_low, theta_high, bins);
  demo.over = mismatch_pmf(theta_high, theta_low, bins);
  demo.kl_under_bits = kl_to_uniform(demo.under);
  demo.kl_over_bits = kl_to_uniform(demo.over);
  return demo;
}

std::string BiasDemo::csv() const {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "k,uniform,under,over\n";
  const double uniform = 1.0 / static_cast<double>(under.size());
  for (std::size_t k = 0; k < under.size(); ++k) {
    out << k << ',' << uniform << ',' << under[k] << ',' << over[k] << '\n';
  }
  return out.str();
}

ChiSquareResult chi_square_uniformity(const SymbolHistogram& hist) {
  const std::size_t bins = hist.bin_count();
  if (bins < 2) {
    throw ContractError("chi-square test needs at least 2 bins");
  }
  if (hist.total < 5 * bins) {
    throw InsufficientDataError("chi-square test needs at least 5 samples per bin, have " +
                                std::to_string(hist.total) + " for " + std::to_string(bins) + " bins");
  }
  const double expected = static_cast<double>(hist.total) / static_cast<double>(bins);
  double stat = 0.0;
  for (const std::uint64_t c : hist.counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  ChiSquareResult result;
  result.statistic = stat;
  result.dof = bins - 1;
  result.p_value = reg_upper_incomplete_gamma(0.5 * static_cast<double>(result.dof), 0.5 * stat);
  return result;
}

DiagnosticsReport diagnose(std::span<const std::uint16_t> symbols, int bit_depth, std::size_t total_input) {
  if (bit_depth < 1 || bit_depth > 16) {
    throw ContractError("diagnose: bit depth must be in 1..16");
  }
  DiagnosticsReport report;
  report.bit_depth = static_cast<std::size_t>(bit_depth);
  report.accepted = symbols.size();
  report.total_input = total_input;
  report.acceptance_fraction =
      total_input == 0 ? 0.0 : static_cast<double>(symbols.size()) / static_cast<double>(total_input);
  if (symbols.empty()) return report;
  const auto hist = SymbolHistogram::of(symbols, std::size_t{1} << bit_depth);
  report.entropy_bits = shannon_entropy_bits(hist);
  report.entropy_per_bit = report.entropy_bits / static_cast<double>(bit_depth);
  report.kl_to_uniform_bits = kl_to_uniform(hist);
  if (hist.total >= 5 * hist.bin_count()) {
    report.chi_square = chi_square_uniformity(hist);
  }
  return report;
}

DiagnosticsReport diagnose(const SymbolStream& stream) {
  return diagnose(stream.symbols, stream.bit_depth, stream.total_input);
}

std::vector<std::uint16_t> channel_symbols(std::span<const BinAssignment> log, Channel channel) {
  std::vector<std::uint16_t> out;
  for (const BinAssignment& a : log) {
    if (a.accepted && a.channel == channel) out.push_back(static_cast<std::uint16_t>(a.bin_index));
  }
  return out;
}

}  // namespace qbin
