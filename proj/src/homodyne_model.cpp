#include "qbin/homodyne_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qbin/binning.hpp"
#include "qbin/errors.hpp"
#include "qbin/rng.hpp"
#include "qbin/special_functions.hpp"

namespace qbin::homodyne {
namespace {

void check_sigma(double sigma) {
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw DomainError("sigma must be positive and finite, got " + std::to_string(sigma));
  }
}

void check_pair(const SamplePair& pair) {
  if (!std::isfinite(pair.x1) || !std::isfinite(pair.x2)) {
    throw DomainError("sample pair must be finite");
  }
  if (pair.degenerate()) {
    throw DegenerateMeasurementError("zero sample pair has no defined angle or radius");
  }
}

void require_posterior(const SufficientStats& stats) {
  if (stats.n < 2) {
    throw InsufficientDataError("sigma posterior needs at least two samples");
  }
  if (!(stats.X() > 0.0)) {
    throw DegenerateMeasurementError("all-zero record: sigma posterior is undefined");
  }
}

double shape_of(const SufficientStats& stats) { return 0.5 * (static_cast<double>(stats.n) - 1.0); }

}  // namespace

SufficientStats merge(const SufficientStats& a, const SufficientStats& b) {
  return {a.n + b.n, a.squares + b.squares};
}

double Posterior::log_density(double sigma) const {
  if (sigma <= 0.0) return -std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  return 0.5 * (nd - 1.0) * std::log(X) - X / (2.0 * sigma * sigma) - 0.5 * (nd - 3.0) * std::numbers::ln2 -
         log_gamma(0.5 * (nd - 1.0)) - nd * std::log(sigma);
}

double Posterior::density(double sigma) const { return std::exp(log_density(sigma)); }

double Posterior::mode() const { return std::sqrt(X / static_cast<double>(n)); }

double pdf(double x, double sigma) {
  check_sigma(sigma);
  const double z = x / sigma;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

SufficientStats update(SufficientStats stats, double x) {
  if (!std::isfinite(x)) {
    throw DomainError("quadrature sample must be finite");
  }
  stats.squares.add(x * x);
  ++stats.n;
  return stats;
}

SufficientStats accumulate(std::span<const double> samples) {
  SufficientStats stats;
  for (const double x : samples) stats = update(stats, x);
  return stats;
}

double mle(const SufficientStats& stats) {
  if (stats.n == 0) {
    throw InsufficientDataError("variance estimate needs at least one sample");
  }
  return stats.X() / static_cast<double>(stats.n);
}

Posterior posterior(const SufficientStats& stats) {
  require_posterior(stats);
  return {stats.n, stats.X()};
}

double posterior_density(double sigma, const SufficientStats& stats) { return posterior(stats).density(sigma); }

Pairing pair_samples(std::span<const double> record) {
  Pairing result;
  result.pairs.reserve(record.size() / 2);
  for (std::size_t i = 0; i + 1 < record.size(); i += 2) {
    const SamplePair pair{record[i], record[i + 1]};
    if (pair.degenerate()) ++result.degenerate;
    result.pairs.push_back(pair);
  }
  result.dropped = record.size() % 2;
  return result;
}

double u2(const SamplePair& pair) {
  check_pair(pair);
  const double turn = (std::atan2(pair.x2, pair.x1) + std::numbers::pi) / (2.0 * std::numbers::pi);
  return turn >= 1.0 ? turn - 1.0 : turn;
}

double u1(const SamplePair& pair, double sigma) {
  check_sigma(sigma);
  check_pair(pair);
  return std::exp(-pair.s() / (2.0 * sigma * sigma));
}

double g_u1(double u, const SamplePair& pair, const SufficientStats& stats) {
  require_posterior(stats);
  check_pair(pair);
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("g_u1: u must lie in (0, 1), got " + std::to_string(u));
  }
  // -ln u1 ~ Gamma((n - 1) / 2, rate X / s)
  const double shape = shape_of(stats);
  const double ratio = stats.X() / pair.s();
  const double minus_log = -std::log(u);
  return std::exp(shape * std::log(ratio) + (shape - 1.0) * std::log(minus_log) + (ratio - 1.0) * std::log(u) -
                  log_gamma(shape));
}

std::vector<double> bin_probabilities_u1(const SamplePair& pair, std::size_t bins, const SufficientStats& stats) {
  require_posterior(stats);
  check_pair(pair);
  if (bins < 2) {
    throw ContractError("bin_probabilities_u1: need at least 2 bins");
  }
  const double shape = shape_of(stats);
  const double ratio = stats.X() / pair.s();
  const double width = 1.0 / static_cast<double>(bins);
  std::vector<double> probs(bins);
  // u1 in [j/N, (j+1)/N)  <=>  -ln u1 in (-ln((j+1)/N), -ln(j/N)]
  double upper = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < bins; ++j) {
    const double lower = (j + 1 == bins) ? 0.0 : -ratio * std::log(static_cast<double>(j + 1) * width);
    probs[j] = reg_gamma_diff(shape, lower, upper);
    upper = lower;
  }
  return probs;
}

std::vector<double> simulate(std::size_t n, double sigma_vac, double sigma_e, std::uint64_t seed) {
  check_sigma(sigma_vac);
  if (!std::isfinite(sigma_e) || sigma_e < 0.0) {
    throw DomainError("electronic noise sigma must be finite and >= 0");
  }
  Rng rng(seed);
  std::vector<double> samples(n);
  for (double& x : samples) x = sigma_vac * rng.normal();
  for (double& x : samples) x += sigma_e * rng.normal();
  return samples;
}

std::optional<std::vector<double>> Model::bin_probabilities(std::span<const double> unit, std::size_t bins,
                                                            const Stats& stats) const {
  const SamplePair pair{unit[0], unit[1]};
  if (pair.degenerate()) return std::nullopt;
  return bin_probabilities_u1(pair, bins, stats);
}

std::optional<std::size_t> Model::angle_symbol(std::span<const double> unit, std::size_t bins) const {
  const SamplePair pair{unit[0], unit[1]};
  if (pair.degenerate()) return std::nullopt;
  const auto index = static_cast<std::size_t>(u2(pair) * static_cast<double>(bins));
  return std::min(index, bins - 1);
}

std::vector<double> Model::conventional_edges(double variance, std::size_t bins) const {
  check_sigma(variance);
  return equiprobable_edges([](double u) { return u; }, bins);
}

std::optional<double> Model::conventional_coordinate(std::span<const double> unit, double variance) const {
  const SamplePair pair{unit[0], unit[1]};
  if (pair.degenerate()) return std::nullopt;
  return u1(pair, std::sqrt(variance));
}

}  // namespace qbin::homodyne
