#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qbin/compensated_sum.hpp"

// Photon time-of-arrival model. Inter-arrival times tau (seconds) follow
// theta * exp(-theta (tau - tau_a)) above the afterpulse cut tau_a; under a flat
// prior the rate theta has a Gamma(n + 1, rate S) posterior with
// S = sum(tau_k - tau_a).
namespace qbin::toa {

struct Config {
  double tau_a = 0.0;         // seconds
  double jitter_sigma = 0.0;  // seconds, evaluation only

  void validate() const;
};

struct SufficientStats {
  std::uint64_t n = 0;
  CompensatedSum offsets;  // sum of (tau - tau_a)

  double S() const noexcept { return offsets.value(); }
};

SufficientStats merge(const SufficientStats& a, const SufficientStats& b);

struct Posterior {
  double shape = 0.0;  // n + 1
  double rate = 0.0;   // S, seconds

  double log_density(double theta) const;
  double density(double theta) const;
  double mean() const noexcept { return shape / rate; }
  double mode() const noexcept { return (shape - 1.0) / rate; }
};

double pdf(double tau, double theta, const Config& config);

/// Density of tau + jitter with jitter ~ Normal(0, sigma_j^2), in the erf-corrected
/// closed form used for the jittered detector. Falls back to pdf() when sigma_j = 0.
double pdf_with_jitter(double tau_r, double theta, const Config& config);

struct FilterResult {
  std::vector<double> samples;
  std::size_t removed = 0;
};

/// Keeps samples with tau >= tau_a, in order.
FilterResult filter_afterpulse(std::span<const double> samples, const Config& config);

SufficientStats update(SufficientStats stats, double tau, const Config& config);
SufficientStats accumulate(std::span<const double> samples, const Config& config);

/// n / S.
double mle(const SufficientStats& stats);

Posterior posterior(const SufficientStats& stats);

/// u = 1 - exp(-theta (tau - tau_a)).
double u_transform(double theta, double tau, const Config& config);

/// Posterior density of u for the measurement tau_i.
double g_u(double u, double tau_i, const SufficientStats& stats, const Config& config);

/// Posterior probability that u(theta | tau_i) falls in each of `bins` equal
/// sub-intervals of [0, 1).
std::vector<double> bin_probabilities(double tau_i, std::size_t bins, const SufficientStats& stats,
                                      const Config& config);

struct SimulationOptions {
  /// Fraction of raw events replaced by afterpulses, drawn uniformly in [0, tau_a).
  double afterpulse_fraction = 0.0;
};

/// tau = tau_a + Exp(theta) (+ Normal(0, sigma_j^2) jitter), deterministic per seed.
std::vector<double> simulate(std::size_t n, double theta, const Config& config, std::uint64_t seed,
                             const SimulationOptions& options = {});

/// Adapter for run_pipeline / online_update_mode.
class Model {
 public:
  using Stats = SufficientStats;
  static constexpr std::size_t kUnitSize = 1;

  explicit Model(Config config);

  const Config& config() const noexcept { return config_; }

  Stats accumulate(std::span<const double> samples) const;
  bool posterior_ready(const Stats& stats) const noexcept { return stats.n >= 1; }
  std::optional<std::vector<double>> bin_probabilities(std::span<const double> unit, std::size_t bins,
                                                       const Stats& stats) const;
  std::optional<std::size_t> angle_symbol(std::span<const double>, std::size_t) const { return std::nullopt; }
  double estimate(const Stats& stats) const { return mle(stats); }
  std::vector<double> conventional_edges(double theta, std::size_t bins) const;
  std::optional<double> conventional_coordinate(std::span<const double> unit, double) const { return unit[0]; }

 private:
  Config config_;
};

}  // namespace qbin::toa
