#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qbin/compensated_sum.hpp"

// Vacuum-quadrature (homodyne) model: samples ~ Normal(0, sigma^2) with sigma
// unknown. Consecutive sample pairs are split, Box-Muller style, into a radial
// variable u1 = exp(-s / (2 sigma^2)), s = x1^2 + x2^2, which depends on sigma,
// and a polar angle u2 which does not.
namespace qbin::homodyne {

struct SufficientStats {
  std::uint64_t n = 0;
  CompensatedSum squares;  // sum of x^2

  double X() const noexcept { return squares.value(); }
};

SufficientStats merge(const SufficientStats& a, const SufficientStats& b);

struct SamplePair {
  double x1 = 0.0;
  double x2 = 0.0;

  double s() const noexcept { return x1 * x1 + x2 * x2; }
  bool degenerate() const noexcept { return s() == 0.0; }
};

struct Pairing {
  std::vector<SamplePair> pairs;
  std::size_t dropped = 0;     // odd trailing sample
  std::size_t degenerate = 0;  // pairs with s = 0
};

/// Flat-prior posterior of sigma given (n, X); needs n >= 2.
struct Posterior {
  std::uint64_t n = 0;
  double X = 0.0;

  double log_density(double sigma) const;
  double density(double sigma) const;
  double mode() const;
};

double pdf(double x, double sigma);

SufficientStats update(SufficientStats stats, double x);
SufficientStats accumulate(std::span<const double> samples);

/// Maximum-likelihood variance X / n.
double mle(const SufficientStats& stats);

Posterior posterior(const SufficientStats& stats);
double posterior_density(double sigma, const SufficientStats& stats);

/// Consecutive non-overlapping pairs (x1, x2), (x3, x4), ...
Pairing pair_samples(std::span<const double> record);

/// Polar angle of (x1, x2) mapped to [0, 1); (1, 0) -> 0.5.
double u2(const SamplePair& pair);

double u1(const SamplePair& pair, double sigma);

/// Posterior density of u1 for this pair.
double g_u1(double u, const SamplePair& pair, const SufficientStats& stats);

/// Posterior probability of u1 falling in each of `bins` equal sub-intervals of (0, 1).
std::vector<double> bin_probabilities_u1(const SamplePair& pair, std::size_t bins, const SufficientStats& stats);

/// x_i = v_i + e_i, v ~ Normal(0, sigma_vac^2), e ~ Normal(0, sigma_e^2). The
/// vacuum set is drawn first, then the noise set, from one seeded stream.
std::vector<double> simulate(std::size_t n, double sigma_vac, double sigma_e, std::uint64_t seed);

/// Adapter for run_pipeline / online_update_mode. The parameter is the variance.
class Model {
 public:
  using Stats = SufficientStats;
  static constexpr std::size_t kUnitSize = 2;

  Stats accumulate(std::span<const double> samples) const { return homodyne::accumulate(samples); }
  bool posterior_ready(const Stats& stats) const noexcept { return stats.n >= 2 && stats.X() > 0.0; }
  std::optional<std::vector<double>> bin_probabilities(std::span<const double> unit, std::size_t bins,
                                                       const Stats& stats) const;
  std::optional<std::size_t> angle_symbol(std::span<const double> unit, std::size_t bins) const;
  double estimate(const Stats& stats) const { return mle(stats); }
  std::vector<double> conventional_edges(double variance, std::size_t bins) const;
  std::optional<double> conventional_coordinate(std::span<const double> unit, double variance) const;
};

}  // namespace qbin::homodyne
