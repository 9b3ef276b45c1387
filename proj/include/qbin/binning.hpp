#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qbin/errors.hpp"

namespace qbin {

enum class Method { conventional_mle, bayesian };

std::string to_string(Method method);

/// Which variable of a measurement a symbol was drawn from. Single-variable
/// models only use `parametric`; the homodyne model also emits the
/// parameter-free polar angle.
enum class Channel : std::uint8_t { parametric, angle };

std::string to_string(Channel channel);

struct BinningConfig {
  int bit_depth = 4;
  double acceptance_prob = 0.95;
  Method method = Method::bayesian;

  std::size_t bin_count() const noexcept { return std::size_t{1} << bit_depth; }

  /// Throws ContractError unless 1 <= bit_depth <= 16 and 0.5 < acceptance_prob <= 1.
  void validate() const;
};

struct BinAssignment {
  std::size_t measurement_index = 0;
  std::size_t bin_index = 0;
  double bin_probability = 0.0;
  bool accepted = false;
  Channel channel = Channel::parametric;
};

struct SymbolStream {
  int bit_depth = 0;
  std::vector<std::uint16_t> symbols;
  std::size_t total_input = 0;
  std::size_t accepted_count = 0;
};

struct BinDecision {
  std::size_t bin_index = 0;
  double probability = 0.0;
  bool accepted = false;
};

/// Edges e_k = inverse_cdf(k / bins), k = 0..bins. Throws ContractError unless
/// strictly increasing.
template <typename InverseCdf>
  requires std::invocable<InverseCdf&, double>
std::vector<double> equiprobable_edges(InverseCdf&& inverse_cdf, std::size_t bins) {
  if (bins < 2) {
    throw ContractError("equiprobable_edges: need at least 2 bins, got " + std::to_string(bins));
  }
  std::vector<double> edges(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    edges[k] = static_cast<double>(inverse_cdf(static_cast<double>(k) / static_cast<double>(bins)));
    if (std::isnan(edges[k]) || (k > 0 && !(edges[k] > edges[k - 1]))) {
      throw ContractError("equiprobable_edges: inverse CDF is not strictly increasing at k=" +
                          std::to_string(k));
    }
  }
  return edges;
}

/// Index i with e_i <= x < e_{i+1}; everything at or beyond e_{N-1} lands in the
/// last bin. Throws OutOfRangeError for x < e_0.
std::size_t assign_conventional(double x, std::span<const double> edges);

/// Argmax bin (lowest index on ties), accepted iff its probability reaches
/// `acceptance_prob`. Throws ContractError when the vector is not normalized to 1e-6.
BinDecision accept_reject(std::span<const double> bin_probs, double acceptance_prob);

/// Packs each symbol into bit_depth bits, MSB first, zero-padding the last byte.
std::vector<std::uint8_t> pack_bits(const SymbolStream& stream);

}  // namespace qbin
