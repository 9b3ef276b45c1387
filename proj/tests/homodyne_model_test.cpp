#include "qbin/homodyne_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qbin/binning.hpp"
#include "qbin/diagnostics.hpp"
#include "qbin/errors.hpp"
#include "qbin/pipeline.hpp"

namespace qbin::homodyne {
namespace {

SufficientStats stats_of(std::uint64_t n, double X) {
  SufficientStats stats;
  stats.n = n;
  stats.squares.add(X);
  return stats;
}

TEST(HomodynePdf, Examples) {
  EXPECT_NEAR(pdf(0.0, 1.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-16);
  for (double x : {0.3, 1.7, 4.0}) EXPECT_EQ(pdf(x, 1.3), pdf(-x, 1.3));
  EXPECT_NEAR(testing::integrate([](double x) { return pdf(x, 0.7); }, -20.0, 20.0, 1e-13, 8), 1.0, 1e-13);
  EXPECT_THROW(pdf(0.0, 0.0), DomainError);
  EXPECT_THROW(pdf(0.0, -1.0), DomainError);
}

TEST(HomodyneStats, UpdateAndMle) {
  EXPECT_EQ(mle(accumulate(std::vector<double>{1.0, -1.0})), 1.0);
  EXPECT_EQ(mle(accumulate(std::vector<double>{0.0, 0.0, 3.0})), 3.0);
  EXPECT_THROW(mle(SufficientStats{}), InsufficientDataError);
  const auto s = update(SufficientStats{}, -2.0);
  EXPECT_EQ(s.n, 1u);
  EXPECT_EQ(s.X(), 4.0);
}

TEST(HomodyneStats, MleRecoversSimulatedVariance) {
  const auto stats = accumulate(simulate(100000, 1.0, 0.1, 12));
  EXPECT_LT(std::abs(mle(stats) / 1.01 - 1.0), 0.02);
}

TEST(HomodyneStats, MergeIsCommutativeMonoid) {
  const auto a = accumulate(std::vector<double>{0.3, -1.2, 2.2});
  const auto b = accumulate(std::vector<double>{0.9});
  EXPECT_EQ(merge(a, b).n, 4u);
  EXPECT_EQ(merge(a, b).X(), merge(b, a).X());
  EXPECT_EQ(merge(a, SufficientStats{}).X(), a.X());
}

TEST(HomodynePosterior, Errors) {
  EXPECT_THROW(posterior(stats_of(1, 1.0)), InsufficientDataError);
  EXPECT_THROW(posterior_density(1.0, stats_of(1, 1.0)), InsufficientDataError);
  EXPECT_THROW(posterior(stats_of(5, 0.0)), DegenerateMeasurementError);
}

TEST(HomodynePosterior, Normalized) {
  for (auto [n, X] : {std::pair{3u, 2.0}, std::pair{10u, 7.5}, std::pair{400u, 410.0}}) {
    const auto stats = stats_of(n, X);
    // sigma^-n tail: integrate in log sigma over a wide range.
    const double mass = testing::integrate(
        [&](double t) {
          const double sigma = std::exp(t);
          return posterior_density(sigma, stats) * sigma;
        },
        std::log(std::sqrt(X) / 50.0), std::log(std::sqrt(X) * 1e9), 1e-13, 32);
    EXPECT_NEAR(mass, 1.0, 1e-8) << n;
  }
}

TEST(HomodynePosterior, ModeIsRootMeanSquare) {
  const auto stats = stats_of(12, 30.0);
  const auto p = posterior(stats);
  const double mode = p.mode();
  EXPECT_NEAR(mode, std::sqrt(30.0 / 12.0), 1e-15);
  const double h = 1e-5;
  EXPECT_NEAR((p.log_density(mode + h) - p.log_density(mode - h)) / (2.0 * h), 0.0, 1e-8);
  EXPECT_LT(p.density(mode * 1.01), p.density(mode));
  EXPECT_LT(p.density(mode * 0.99), p.density(mode));
}

TEST(HomodynePosterior, MatchesGridBayesOracle) {
  std::mt19937_64 gen(202);
  std::uniform_int_distribution<int> size(3, 50);
  std::uniform_real_distribution<double> sigma(0.5, 2.0);
  for (int dataset = 0; dataset < 20; ++dataset) {
    const auto samples = simulate(static_cast<std::size_t>(size(gen)), sigma(gen), 0.0, gen());
    const auto stats = accumulate(samples);
    const auto p = posterior(stats);
    const auto grid = testing::grid_posterior(
        [&](double s) {
          double log_l = 0.0;
          for (double x : samples) log_l += -std::log(s) - x * x / (2.0 * s * s);
          return log_l;
        },
        std::sqrt(stats.X()) / 50.0, std::sqrt(stats.X()) * 1e5);
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.parameter.size(); ++i) {
      sup = std::max(sup, std::abs(p.density(grid.parameter[i]) - grid.density[i]));
    }
    EXPECT_LE(sup, 1e-6) << "n=" << stats.n;
  }
}

TEST(HomodynePairing, Examples) {
  const auto three = pair_samples(std::vector<double>{1.0, 2.0, 3.0});
  ASSERT_EQ(three.pairs.size(), 1u);
  EXPECT_EQ(three.pairs[0].x1, 1.0);
  EXPECT_EQ(three.pairs[0].x2, 2.0);
  EXPECT_EQ(three.dropped, 1u);
  const auto none = pair_samples(std::vector<double>{});
  EXPECT_TRUE(none.pairs.empty());
  EXPECT_EQ(none.dropped, 0u);
  const auto zero = pair_samples(std::vector<double>{0.0, 0.0});
  EXPECT_EQ(zero.pairs.size(), 1u);
  EXPECT_EQ(zero.degenerate, 1u);
  EXPECT_TRUE(zero.pairs[0].degenerate());
}

TEST(HomodyneU2, Examples) {
  EXPECT_EQ(u2({1.0, 0.0}), 0.5);
  EXPECT_EQ(u2({0.0, 1.0}), 0.75);
  EXPECT_EQ(u2({-1.0, 0.0}), 0.0);
  EXPECT_EQ(u2({-1.0, -0.0}), 0.0);
  EXPECT_EQ(u2({0.0, -1.0}), 0.25);
  EXPECT_THROW(u2({0.0, 0.0}), DegenerateMeasurementError);
}

TEST(HomodyneU2, UniformOnIsotropicStream) {
  const auto record = simulate(100000, 1.0, 0.1, 19);
  std::vector<std::uint16_t> symbols;
  const Model model;
  for (const auto& pair : pair_samples(record).pairs) {
    const std::vector<double> unit{pair.x1, pair.x2};
    symbols.push_back(static_cast<std::uint16_t>(*model.angle_symbol(unit, 64)));
  }
  ASSERT_EQ(symbols.size(), 50000u);
  EXPECT_GT(chi_square_uniformity(SymbolHistogram::of(symbols, 64)).p_value, 0.01);
}

TEST(HomodyneU1, Examples) {
  EXPECT_NEAR(u1({1.0, 1.0}, 1.0), std::exp(-1.0), 1e-16);
  EXPECT_GT(u1({1.0, 1.0}, 1e6), 1.0 - 1e-11);
  EXPECT_LT(u1({1.0, 1.0}, 1e-3), 1e-300);
  double previous = 0.0;
  for (double sigma = 0.1; sigma < 10.0; sigma *= 1.2) {
    const double u = u1({0.4, -0.8}, sigma);
    EXPECT_GT(u, previous);
    previous = u;
  }
  EXPECT_THROW(u1({1.0, 1.0}, 0.0), DomainError);
  EXPECT_THROW(u1({0.0, 0.0}, 1.0), DegenerateMeasurementError);
}

TEST(HomodyneU1, UniformWithKnownSigma) {
  const double sigma = std::sqrt(1.01);
  const auto record = simulate(200000, 1.0, 0.1, 23);
  std::vector<double> values;
  for (const auto& pair : pair_samples(record).pairs) values.push_back(u1(pair, sigma));
  const double d = testing::ks_statistic(values, [](double u) { return u; });
  EXPECT_LT(std::sqrt(static_cast<double>(values.size())) * d, testing::kKsCritical01);
}

TEST(HomodyneGu1, Normalized) {
  for (auto [n, X, x1, x2] : {std::tuple{3u, 2.0, 0.5, 1.0}, std::tuple{8u, 9.0, 2.0, -0.1},
                              std::tuple{60u, 55.0, 0.1, 0.2}}) {
    const auto stats = stats_of(n, X);
    const SamplePair pair{x1, x2};
    const double mass =
        testing::integrate_singular([&](double u) { return g_u1(u, pair, stats); }, 0.0, 1.0);
    EXPECT_NEAR(mass, 1.0, 1e-8) << n;
  }
}

TEST(HomodyneGu1, UniformSpecialCase) {
  const SamplePair pair{0.6, -0.8};
  const auto stats = stats_of(3, pair.s());
  for (double u : {0.01, 0.3, 0.5, 0.97}) EXPECT_NEAR(g_u1(u, pair, stats), 1.0, 1e-14);
  const auto probs = bin_probabilities_u1(pair, 4, stats);
  for (double p : probs) EXPECT_NEAR(p, 0.25, 1e-14);
}

TEST(HomodyneGu1, MonteCarloPushForward) {
  const auto stats = stats_of(15, 17.0);
  const SamplePair pair{0.9, 0.7};
  std::mt19937_64 gen(55);
  std::gamma_distribution<double> y(0.5 * (15.0 - 1.0), 1.0);  // X / (2 sigma^2)
  std::vector<double> draws(100000);
  for (double& u : draws) {
    const double sigma = std::sqrt(stats.X() / (2.0 * y(gen)));
    u = u1(pair, sigma);
  }
  std::vector<double> cdf(401, 0.0);
  for (std::size_t i = 1; i < cdf.size(); ++i) {
    cdf[i] = cdf[i - 1] + testing::integrate_singular([&](double u) { return g_u1(u, pair, stats); },
                                                      static_cast<double>(i - 1) / 400.0,
                                                      static_cast<double>(i) / 400.0);
  }
  const double d = testing::ks_statistic(draws, [&](double u) {
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(u * 400.0), 399);
    const double w = u * 400.0 - static_cast<double>(k);
    return cdf[k] + w * (cdf[k + 1] - cdf[k]);
  });
  EXPECT_LT(d, 0.01);
}

TEST(HomodyneGu1, Errors) {
  EXPECT_THROW(g_u1(0.5, {1.0, 0.0}, stats_of(1, 1.0)), InsufficientDataError);
  EXPECT_THROW(g_u1(0.5, {0.0, 0.0}, stats_of(4, 1.0)), DegenerateMeasurementError);
  EXPECT_THROW(bin_probabilities_u1({0.0, 0.0}, 4, stats_of(4, 1.0)), DegenerateMeasurementError);
}

TEST(HomodyneBinProbabilities, MatchQuadratureOfDensity) {
  std::mt19937_64 gen(8);
  std::uniform_int_distribution<int> size(3, 50);
  for (std::size_t bins : {4u, 16u, 128u}) {
    for (int trial = 0; trial < 8; ++trial) {
      const auto samples = simulate(static_cast<std::size_t>(size(gen)), 1.0, 0.1, gen());
      const auto stats = accumulate(samples);
      const auto pairs = pair_samples(samples).pairs;
      const SamplePair pair = pairs[gen() % pairs.size()];
      const auto probs = bin_probabilities_u1(pair, bins, stats);
      for (std::size_t j = 0; j < bins; ++j) {
        const double lo = static_cast<double>(j) / static_cast<double>(bins);
        const double hi = static_cast<double>(j + 1) / static_cast<double>(bins);
        const double quad = testing::integrate_singular([&](double u) { return g_u1(u, pair, stats); }, lo, hi);
        EXPECT_NEAR(probs[j], quad, 1e-8) << bins << ' ' << j;
      }
      EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-9);
    }
  }
}

TEST(HomodyneBinProbabilities, ScaleEquivariant) {
  const auto record = simulate(1000, 1.0, 0.1, 61);
  const auto stats = accumulate(record);
  for (double c : {1e-3, 0.37, 12.0}) {
    std::vector<double> scaled(record);
    for (double& x : scaled) x *= c;
    const auto scaled_stats = accumulate(scaled);
    for (std::size_t i = 0; i + 1 < 40; i += 2) {
      const auto a = bin_probabilities_u1({record[i], record[i + 1]}, 64, stats);
      const auto b = bin_probabilities_u1({scaled[i], scaled[i + 1]}, 64, scaled_stats);
      for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(b[j], a[j], 1e-12) << c;
    }
  }
}

TEST(HomodyneInvariance, PermutationAndChunkedMerge) {
  auto record = simulate(20000, 1.0, 0.1, 66);
  const auto reference = accumulate(record);
  SufficientStats merged;
  for (std::size_t start = 0; start < record.size(); start += 3000) {
    const std::size_t len = std::min<std::size_t>(3000, record.size() - start);
    merged = merge(merged, accumulate(std::span<const double>(record).subspan(start, len)));
  }
  EXPECT_EQ(merged.n, reference.n);
  EXPECT_NEAR(merged.X(), reference.X(), 1e-12 * reference.X());
  std::mt19937_64 gen(1);
  std::shuffle(record.begin(), record.end(), gen);
  const auto shuffled = accumulate(record);
  EXPECT_EQ(shuffled.n, reference.n);
  EXPECT_NEAR(shuffled.X(), reference.X(), 1e-12 * reference.X());
  const auto a = bin_probabilities_u1({0.3, 0.4}, 64, reference);
  const auto b = bin_probabilities_u1({0.3, 0.4}, 64, shuffled);
  for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(b[j], a[j], 1e-12 * std::max(a[j], 1e-300));
}

TEST(HomodyneSimulate, DeterministicVarianceAndShape) {
  EXPECT_EQ(simulate(500, 1.0, 0.1, 3), simulate(500, 1.0, 0.1, 3));
  EXPECT_NE(simulate(500, 1.0, 0.1, 3), simulate(500, 1.0, 0.1, 4));
  const std::size_t n = 50000;
  const auto samples = simulate(n, 1.0, 0.1, 1);
  const double variance = mle(accumulate(samples));
  // Var of the sample second moment is 2 sigma^4.
  EXPECT_LT(std::abs(variance - 1.01), 3.0 * std::sqrt(2.0) * 1.01 / std::sqrt(static_cast<double>(n)));
  const double d = testing::ks_statistic(
      samples, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0 * 1.01)); });
  EXPECT_LT(std::sqrt(static_cast<double>(n)) * d, testing::kKsCritical01);
}

TEST(HomodynePipeline, EmissionOrderAndCounts) {
  const Model model;
  auto record = simulate(2001, 1.0, 0.1, 9);
  record[4] = 0.0;
  record[5] = 0.0;
  const auto result = run_pipeline(record, model, BinningConfig{3, 0.95, Method::bayesian});
  EXPECT_EQ(result.stream.total_input, 2001u);
  ASSERT_EQ(result.assignments.size(), 2000u);
  std::size_t symbol = 0;
  for (std::size_t i = 0; i < result.assignments.size(); i += 2) {
    const auto& radial = result.assignments[i];
    const auto& angle = result.assignments[i + 1];
    EXPECT_EQ(radial.channel, Channel::parametric);
    EXPECT_EQ(angle.channel, Channel::angle);
    EXPECT_EQ(radial.measurement_index, angle.measurement_index);
    if (radial.accepted) EXPECT_EQ(result.stream.symbols[symbol++], radial.bin_index);
    if (angle.accepted) EXPECT_EQ(result.stream.symbols[symbol++], angle.bin_index);
  }
  EXPECT_EQ(symbol, result.stream.accepted_count);
  EXPECT_FALSE(result.assignments[4].accepted);
  EXPECT_FALSE(result.assignments[5].accepted);
}

TEST(HomodynePipeline, ConventionalAcceptsEveryPairTwice) {
  const Model model;
  const auto record = simulate(1000, 1.0, 0.1, 10);
  const auto result = run_pipeline(record, model, BinningConfig{6, 0.95, Method::conventional_mle});
  EXPECT_EQ(result.stream.accepted_count, record.size());
  ASSERT_TRUE(result.parameter.has_value());
  EXPECT_DOUBLE_EQ(*result.parameter, mle(result.stats));
}

TEST(HomodynePipeline, ConventionalWithTrueVarianceIsUniform) {
  const Model model;
  const auto record = simulate(50000, 1.0, 0.1, 1);
  const auto result = run_pipeline(record, model, BinningConfig{6, 0.95, Method::conventional_mle}, 1.01);
  const auto radial = channel_symbols(result.assignments, Channel::parametric);
  EXPECT_GT(chi_square_uniformity(SymbolHistogram::of(radial, 64)).p_value, 0.01);
}

}  // namespace
}  // namespace qbin::homodyne
