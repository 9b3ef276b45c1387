#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qbin/binning.hpp"
#include "qbin/record_io.hpp"

namespace qbin::cli {

enum class Command {
  help,
  simulate_toa,
  simulate_homodyne,
  bin,
  diagnose,
  bias_demo,
  replicate_toa,
  replicate_homodyne,
};

inline constexpr double kReferenceTheta = 9.16e5;         // s^-1
inline constexpr double kReferenceTauA = 7.81e-8;         // s
inline constexpr std::size_t kReferenceToaCount = 221'890;
inline constexpr std::size_t kReferenceHomodyneCount = 50'000;

struct RunConfig {
  Command command = Command::help;
  ModelKind model = ModelKind::toa;
  Method method = Method::bayesian;
  int bit_depth = 4;
  double acceptance_prob = 0.95;
  double tau_a = 0.0;
  double jitter_sigma = 0.0;
  double theta = kReferenceTheta;
  double afterpulse_fraction = 0.0;
  double sigma_vac = 1.0;
  double sigma_e = 0.1;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  std::optional<double> fixed_parameter;
  std::filesystem::path input_path;
  std::filesystem::path output_path;
  bool online = false;
  std::string help_text;
};

/// Parses argv (including the program name). Throws UsageError naming the
/// violated constraint; `--help` yields Command::help with the rendered text.
RunConfig parse_and_validate(const std::vector<std::string>& args);

/// Runs a validated configuration, writing human-readable output to `out`.
/// Returns the process exit status; library errors propagate as exceptions.
int run(const RunConfig& config, std::ostream& out);

struct ReplicationRow {
  std::string method;  // "conventional", "conventional-true", "bayesian"
  std::string channel; // "parametric", "angle", "combined"
  int bit_depth = 0;
  std::size_t accepted = 0;
  std::size_t total_input = 0;
  double entropy_per_bit = 0.0;
  double kl_to_uniform_bits = 0.0;
  std::optional<double> chi_square_p;
  std::optional<std::size_t> reference_accepted;
  std::optional<double> reference_entropy_per_bit;
  std::vector<std::uint64_t> histogram;
};

struct Replication {
  std::string name;
  std::uint64_t seed = 0;
  std::size_t sample_count = 0;
  double estimate = 0.0;  // MLE of the model parameter on the simulated record
  std::vector<ReplicationRow> rows;

  const ReplicationRow& row(const std::string& method, int bit_depth,
                            const std::string& channel = "parametric") const;
};

/// Seeded stand-in for the time-of-arrival experiment: 221,890 filtered samples
/// at the reported rate and afterpulse cut, binned at 4, 7 and 8 bits.
Replication replicate_toa(const RunConfig& config);

/// Seeded vacuum-homodyne run (50,000 samples, sigma_vac = 1, sigma_e = 0.1)
/// binned at 6 and 7 bits.
Replication replicate_homodyne(const RunConfig& config);

}  // namespace qbin::cli
