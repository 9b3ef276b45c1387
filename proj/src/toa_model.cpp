#include "qbin/toa_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qbin/binning.hpp"
#include "qbin/errors.hpp"
#include "qbin/rng.hpp"
#include "qbin/special_functions.hpp"

namespace qbin::toa {
namespace {

void check_rate(double theta) {
  if (!std::isfinite(theta) || theta <= 0.0) {
    throw DomainError("rate must be positive and finite, got " + std::to_string(theta));
  }
}

double offset_of(double tau, const Config& config) {
  if (std::isnan(tau) || tau < config.tau_a) {
    throw DomainError("inter-arrival time " + std::to_string(tau) + " s is below the afterpulse cut " +
                      std::to_string(config.tau_a) + " s");
  }
  return tau - config.tau_a;
}

void require_data(const SufficientStats& stats) {
  if (stats.n == 0) {
    throw InsufficientDataError("time-of-arrival posterior needs at least one sample");
  }
}

}  // namespace

void Config::validate() const {
  if (!std::isfinite(tau_a) || tau_a < 0.0) {
    throw ContractError("tau_a must be finite and >= 0, got " + std::to_string(tau_a));
  }
  if (!std::isfinite(jitter_sigma) || jitter_sigma < 0.0) {
    throw ContractError("jitter sigma must be finite and >= 0, got " + std::to_string(jitter_sigma));
  }
}

SufficientStats merge(const SufficientStats& a, const SufficientStats& b) {
  return {a.n + b.n, a.offsets + b.offsets};
}

double Posterior::log_density(double theta) const {
  if (theta <= 0.0) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) + (shape - 1.0) * std::log(theta) - theta * rate - log_gamma(shape);
}

double Posterior::density(double theta) const { return std::exp(log_density(theta)); }

double pdf(double tau, double theta, const Config& config) {
  check_rate(theta);
  return theta * std::exp(-theta * offset_of(tau, config));
}

double pdf_with_jitter(double tau_r, double theta, const Config& config) {
  const double sigma = config.jitter_sigma;
  if (sigma == 0.0) return pdf(tau_r, theta, config);
  check_rate(theta);
  const double offset = tau_r - config.tau_a;
  const double scale = theta * std::exp(-theta * offset + 0.5 * sigma * sigma * theta * theta);
  const double root2 = std::numbers::sqrt2;
  return scale * (qbin::erf((offset - sigma * sigma * theta) / (root2 * sigma)) -
                  qbin::erf(theta * sigma / root2));
}

FilterResult filter_afterpulse(std::span<const double> samples, const Config& config) {
  FilterResult result;
  result.samples.reserve(samples.size());
  for (const double tau : samples) {
    if (tau >= config.tau_a) {
      result.samples.push_back(tau);
    } else {
      ++result.removed;
    }
  }
  return result;
}

SufficientStats update(SufficientStats stats, double tau, const Config& config) {
  stats.offsets.add(offset_of(tau, config));
  ++stats.n;
  return stats;
}

SufficientStats accumulate(std::span<const double> samples, const Config& config) {
  SufficientStats stats;
  for (const double tau : samples) stats = update(stats, tau, config);
  return stats;
}

double mle(const SufficientStats& stats) {
  require_data(stats);
  return static_cast<double>(stats.n) / stats.S();
}

Posterior posterior(const SufficientStats& stats) {
  require_data(stats);
  if (!(stats.S() > 0.0)) {
    throw DegenerateMeasurementError("all samples sit at the afterpulse cut; posterior rate is undefined");
  }
  return {static_cast<double>(stats.n) + 1.0, stats.S()};
}

double u_transform(double theta, double tau, const Config& config) {
  check_rate(theta);
  return -std::expm1(-theta * offset_of(tau, config));
}

namespace {

// theta * Delta_i ~ Gamma(n + 1, rate S / Delta_i) under the posterior.
double scaled_rate(double tau_i, const SufficientStats& stats, const Config& config) {
  const Posterior post = posterior(stats);
  const double delta = offset_of(tau_i, config);
  if (delta == 0.0) {
    throw DegenerateMeasurementError("measurement at the afterpulse cut maps to u = 0 for every rate");
  }
  return post.rate / delta;
}

}  // namespace

double g_u(double u, double tau_i, const SufficientStats& stats, const Config& config) {
  const double beta = scaled_rate(tau_i, stats, config);
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("g_u: u must lie in (0, 1), got " + std::to_string(u));
  }
  const double shape = static_cast<double>(stats.n) + 1.0;
  const double minus_log = -std::log1p(-u);
  const double log_density = shape * std::log(beta) + (shape - 1.0) * std::log(minus_log) +
                             (beta - 1.0) * std::log1p(-u) - log_gamma(shape);
  return std::exp(log_density);
}

std::vector<double> bin_probabilities(double tau_i, std::size_t bins, const SufficientStats& stats,
                                      const Config& config) {
  if (bins < 2) {
    throw ContractError("bin_probabilities: need at least 2 bins");
  }
  const double beta = scaled_rate(tau_i, stats, config);
  const double shape = static_cast<double>(stats.n) + 1.0;
  const double width = 1.0 / static_cast<double>(bins);
  std::vector<double> probs(bins);
  double lower = 0.0;
  for (std::size_t j = 0; j < bins; ++j) {
    const double upper = (j + 1 == bins) ? std::numeric_limits<double>::infinity()
                                         : -beta * std::log1p(-static_cast<double>(j + 1) * width);
    probs[j] = reg_gamma_diff(shape, lower, upper);
    lower = upper;
  }
  return probs;
}

std::vector<double> simulate(std::size_t n, double theta, const Config& config, std::uint64_t seed,
                             const SimulationOptions& options) {
  check_rate(theta);
  config.validate();
  if (!(options.afterpulse_fraction >= 0.0 && options.afterpulse_fraction < 1.0)) {
    throw ContractError("afterpulse fraction must be in [0, 1)");
  }
  Rng rng(seed);
  std::vector<double> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (options.afterpulse_fraction > 0.0 && rng.uniform() < options.afterpulse_fraction) {
      samples.push_back(config.tau_a * rng.uniform());
      continue;
    }
    double tau = config.tau_a + rng.exponential(theta);
    if (config.jitter_sigma > 0.0) tau += config.jitter_sigma * rng.normal();
    samples.push_back(tau);
  }
  return samples;
}

Model::Model(Config config) : config_(config) { config_.validate(); }

SufficientStats Model::accumulate(std::span<const double> samples) const {
  return toa::accumulate(samples, config_);
}

std::optional<std::vector<double>> Model::bin_probabilities(std::span<const double> unit, std::size_t bins,
                                                            const Stats& stats) const {
  if (unit[0] == config_.tau_a) return std::nullopt;
  return toa::bin_probabilities(unit[0], bins, stats, config_);
}

std::vector<double> Model::conventional_edges(double theta, std::size_t bins) const {
  check_rate(theta);
  const double tau_a = config_.tau_a;
  return equiprobable_edges(
      [&](double u) { return u >= 1.0 ? std::numeric_limits<double>::infinity() : tau_a - std::log1p(-u) / theta; },
      bins);
}

}  // namespace qbin::toa
