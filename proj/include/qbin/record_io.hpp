#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qbin/binning.hpp"

namespace qbin {

enum class ModelKind { toa, homodyne };

std::string to_string(ModelKind kind);

struct MeasurementRecord {
  ModelKind kind = ModelKind::toa;
  std::vector<double> samples;

  /// "s" for time-of-arrival records, "1" (dimensionless) for quadratures.
  std::string units() const;
};

/// One decimal sample per line; lines starting with '#' and blank lines are skipped.
MeasurementRecord parse_record(std::istream& in, ModelKind kind);
MeasurementRecord read_record(const std::filesystem::path& path, ModelKind kind);
void write_record(const std::filesystem::path& path, const MeasurementRecord& record,
                  std::span<const std::string> comments = {});

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Header `# bit_depth=<b> total_input=<M> accepted=<K>`, then one symbol per line.
void write_symbols_csv(const std::filesystem::path& path, const SymbolStream& stream);
SymbolStream read_symbols_csv(const std::filesystem::path& path);

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

/// Columns: measurement_index,channel,bin_index,bin_probability,accepted
void write_assignment_log(const std::filesystem::path& path, std::span<const BinAssignment> log);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Tracks files written by a command and deletes them unless commit() is
/// reached, so a failing command leaves no partial outputs behind.
class OutputTransaction {
 public:
  OutputTransaction() = default;
  OutputTransaction(const OutputTransaction&) = delete;
  OutputTransaction& operator=(const OutputTransaction&) = delete;
  ~OutputTransaction();

  std::filesystem::path add(std::filesystem::path path);
  void commit() noexcept { committed_ = true; }

 private:
  std::vector<std::filesystem::path> files_;
  bool committed_ = false;
};

}  // namespace qbin
