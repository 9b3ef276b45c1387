#include "qbin/binning.hpp"

#include <algorithm>
#include <numeric>

namespace qbin {

std::string to_string(Method method) {
  switch (method) {
    case Method::conventional_mle:
      return "conventional";
    case Method::bayesian:
      return "bayesian";
  }
  return "unknown";
}

std::string to_string(Channel channel) {
  return channel == Channel::parametric ? "parametric" : "angle";
}

void BinningConfig::validate() const {
  if (bit_depth < 1 || bit_depth > 16) {
    throw ContractError("bit_depth must be in 1..16, got " + std::to_string(bit_depth));
  }
  if (!(acceptance_prob > 0.5 && acceptance_prob <= 1.0)) {
    throw ContractError("acceptance probability must be in (0.5, 1], got " + std::to_string(acceptance_prob));
  }
}

std::size_t assign_conventional(double x, std::span<const double> edges) {
  if (edges.size() < 3) {
    throw ContractError("assign_conventional: need at least 2 bins");
  }
  if (std::isnan(x) || x < edges.front()) {
    throw OutOfRangeError("measurement " + std::to_string(x) + " lies below the first bin edge " +
                          std::to_string(edges.front()));
  }
  const std::size_t last = edges.size() - 2;
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  const auto index = static_cast<std::size_t>(it - edges.begin()) - 1;
  return std::min(index, last);
}

BinDecision accept_reject(std::span<const double> bin_probs, double acceptance_prob) {
  if (bin_probs.empty()) {
    throw ContractError("accept_reject: empty probability vector");
  }
  const double sum = std::accumulate(bin_probs.begin(), bin_probs.end(), 0.0);
  if (!(std::abs(sum - 1.0) <= 1e-6)) {
    throw ContractError("accept_reject: bin probabilities sum to " + std::to_string(sum));
  }
  const auto best = std::max_element(bin_probs.begin(), bin_probs.end());
  BinDecision decision;
  decision.bin_index = static_cast<std::size_t>(best - bin_probs.begin());
  decision.probability = *best;
  decision.accepted = *best >= acceptance_prob;
  return decision;
}

std::vector<std::uint8_t> pack_bits(const SymbolStream& stream) {
  const int bits = stream.bit_depth;
  if (bits < 1 || bits > 16) {
    throw ContractError("pack_bits: bit depth must be in 1..16, got " + std::to_string(bits));
  }
  const std::size_t total_bits = stream.symbols.size() * static_cast<std::size_t>(bits);
  std::vector<std::uint8_t> out((total_bits + 7) / 8, 0);
  std::size_t cursor = 0;
  for (const std::uint16_t symbol : stream.symbols) {
    if (symbol >> bits) {
      throw ContractError("pack_bits: symbol " + std::to_string(symbol) + " does not fit in " +
                          std::to_string(bits) + " bits");
    }
    for (int b = bits - 1; b >= 0; --b, ++cursor) {
      if ((symbol >> b) & 1u) {
        out[cursor / 8] |= static_cast<std::uint8_t>(0x80u >> (cursor % 8));
      }
    }
  }
  return out;
}

}  // namespace qbin
