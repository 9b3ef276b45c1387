#pragma once

#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qbin/binning.hpp"
#include "qbin/errors.hpp"

namespace qbin {

/// What the pipeline needs from a measurement model. A measurement unit is a
/// run of `kUnitSize` consecutive samples (one inter-arrival time, or one pair
/// of quadratures); a trailing partial unit is not binned but still feeds the
/// statistics.
template <typename M>
concept BinningModel = requires(const M& model, std::span<const double> samples,
                                const typename M::Stats& stats, std::size_t bins, double parameter) {
  typename M::Stats;
  { M::kUnitSize } -> std::convertible_to<std::size_t>;
  { model.accumulate(samples) } -> std::same_as<typename M::Stats>;
  { merge(stats, stats) } -> std::same_as<typename M::Stats>;
  { model.posterior_ready(stats) } -> std::same_as<bool>;
  // nullopt for a degenerate unit that no posterior can place
  { model.bin_probabilities(samples, bins, stats) } -> std::same_as<std::optional<std::vector<double>>>;
  // parameter-free symbol, emitted unconditionally (nullopt if the model has none)
  { model.angle_symbol(samples, bins) } -> std::same_as<std::optional<std::size_t>>;
  { model.estimate(stats) } -> std::same_as<double>;
  { model.conventional_edges(parameter, bins) } -> std::same_as<std::vector<double>>;
  { model.conventional_coordinate(samples, parameter) } -> std::same_as<std::optional<double>>;
};

template <typename Stats>
struct PipelineResult {
  SymbolStream stream;
  std::vector<BinAssignment> assignments;
  Stats stats{};
  /// Parameter the conventional method binned with; unset for the Bayesian method.
  std::optional<double> parameter;
};

namespace detail {

template <typename Stats>
void emit(PipelineResult<Stats>& result, std::size_t unit, const BinDecision& decision, Channel channel) {
  result.assignments.push_back({unit, decision.bin_index, decision.probability, decision.accepted, channel});
  if (decision.accepted) {
    result.stream.symbols.push_back(static_cast<std::uint16_t>(decision.bin_index));
  }
}

template <BinningModel M>
void emit_angle(PipelineResult<typename M::Stats>& result, const M& model, std::span<const double> unit,
                std::size_t index, std::size_t bins) {
  if (const auto symbol = model.angle_symbol(unit, bins)) {
    emit(result, index, BinDecision{*symbol, 1.0, true}, Channel::angle);
  } else if constexpr (M::kUnitSize > 1) {
    emit(result, index, BinDecision{0, 0.0, false}, Channel::angle);
  }
}

template <BinningModel M>
void bin_bayesian_unit(PipelineResult<typename M::Stats>& result, const M& model, std::span<const double> unit,
                       std::size_t index, const typename M::Stats& stats, const BinningConfig& config) {
  const auto probs = model.bin_probabilities(unit, config.bin_count(), stats);
  const BinDecision decision = probs ? accept_reject(*probs, config.acceptance_prob) : BinDecision{};
  emit(result, index, decision, Channel::parametric);
  emit_angle(result, model, unit, index, config.bin_count());
}

template <typename Stats>
void finish(PipelineResult<Stats>& result, std::size_t total_input, int bit_depth) {
  result.stream.bit_depth = bit_depth;
  result.stream.total_input = total_input;
  result.stream.accepted_count = result.stream.symbols.size();
}

}  // namespace detail

/// Batch conversion of a whole record.
///
/// Bayesian: the posterior is built from every sample of the record, then each
/// unit is accepted into its most probable bin when that bin holds at least
/// `acceptance_prob` of the posterior mass. Conventional: the model parameter is
/// estimated once (or taken from `fixed_parameter`) and every unit is assigned
/// to its equiprobable bin.
template <BinningModel M>
PipelineResult<typename M::Stats> run_pipeline(std::span<const double> record, const M& model,
                                               const BinningConfig& config,
                                               std::optional<double> fixed_parameter = std::nullopt) {
  config.validate();
  PipelineResult<typename M::Stats> result;
  const std::size_t bins = config.bin_count();
  const std::size_t units = record.size() / M::kUnitSize;

  if (config.method == Method::conventional_mle) {
    if (!record.empty()) {
      result.stats = model.accumulate(record);
      const double parameter = fixed_parameter ? *fixed_parameter : model.estimate(result.stats);
      result.parameter = parameter;
      const std::vector<double> edges = model.conventional_edges(parameter, bins);
      for (std::size_t i = 0; i < units; ++i) {
        const auto unit = record.subspan(i * M::kUnitSize, M::kUnitSize);
        BinDecision decision;
        if (const auto coordinate = model.conventional_coordinate(unit, parameter)) {
          decision = {assign_conventional(*coordinate, edges), 1.0, true};
        }
        detail::emit(result, i, decision, Channel::parametric);
        detail::emit_angle(result, model, unit, i, bins);
      }
    }
    detail::finish(result, record.size(), config.bit_depth);
    return result;
  }

  result.stats = model.accumulate(record);
  if (!model.posterior_ready(result.stats)) {
    throw InsufficientDataError("record too short for a proper posterior");
  }
  result.assignments.reserve(units * (M::kUnitSize > 1 ? 2 : 1));
  for (std::size_t i = 0; i < units; ++i) {
    detail::bin_bayesian_unit(result, model, record.subspan(i * M::kUnitSize, M::kUnitSize), i, result.stats,
                              config);
  }
  detail::finish(result, record.size(), config.bit_depth);
  return result;
}

/// Sequential variant: unit i is binned against the posterior of all samples
/// before it, then folded in. Early units are rejected while the posterior is
/// improper or too broad. Only defined for the Bayesian method.
template <BinningModel M>
PipelineResult<typename M::Stats> online_update_mode(std::span<const double> record, const M& model,
                                                     const BinningConfig& config) {
  config.validate();
  if (config.method != Method::bayesian) {
    throw ContractError("online update mode requires the bayesian method");
  }
  PipelineResult<typename M::Stats> result;
  const std::size_t units = record.size() / M::kUnitSize;
  typename M::Stats stats{};
  for (std::size_t i = 0; i < units; ++i) {
    const auto unit = record.subspan(i * M::kUnitSize, M::kUnitSize);
    if (model.posterior_ready(stats)) {
      detail::bin_bayesian_unit(result, model, unit, i, stats, config);
    } else {
      detail::emit(result, i, BinDecision{}, Channel::parametric);
      detail::emit_angle(result, model, unit, i, config.bin_count());
    }
    stats = merge(stats, model.accumulate(unit));
  }
  result.stats = merge(stats, model.accumulate(record.subspan(units * M::kUnitSize)));
  detail::finish(result, record.size(), config.bit_depth);
  return result;
}

}  // namespace qbin
