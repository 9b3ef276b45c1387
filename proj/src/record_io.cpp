#include "qbin/record_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "qbin/errors.hpp"

namespace qbin {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  return in;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write to " + path.string() + " failed");
}

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::toa ? "toa" : "homodyne"; }

std::string MeasurementRecord::units() const { return kind == ModelKind::toa ? "s" : "1"; }

MeasurementRecord parse_record(std::istream& in, ModelKind kind) {
  MeasurementRecord record;
  record.kind = kind;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    // from_chars rejects a leading '+', which is valid CSV float text
    const std::string_view digits = text.front() == '+' ? text.substr(1) : text;
    double value = 0.0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || end != digits.data() + digits.size()) {
      throw ParseError("malformed sample '" + std::string(text) + "'", line_number);
    }
    if (!std::isfinite(value)) {
      throw ParseError("non-finite sample", line_number);
    }
    record.samples.push_back(value);
  }
  return record;
}

MeasurementRecord read_record(const std::filesystem::path& path, ModelKind kind) {
  auto in = open_in(path);
  return parse_record(in, kind);
}

std::string format_double(double value) {
  std::array<char, 32> buffer{};
  const auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc{}) throw Error("cannot format floating-point value");
  return std::string(buffer.data(), end);
}

void write_record(const std::filesystem::path& path, const MeasurementRecord& record,
                  std::span<const std::string> comments) {
  auto out = open_out(path);
  out << "# model=" << to_string(record.kind) << " units=" << record.units() << '\n';
  for (const std::string& c : comments) out << "# " << c << '\n';
  for (const double x : record.samples) out << format_double(x) << '\n';
  finish(out, path);
}

void write_symbols_csv(const std::filesystem::path& path, const SymbolStream& stream) {
  auto out = open_out(path);
  out << "# bit_depth=" << stream.bit_depth << " total_input=" << stream.total_input
      << " accepted=" << stream.accepted_count << '\n';
  for (const std::uint16_t s : stream.symbols) out << s << '\n';
  finish(out, path);
}

SymbolStream read_symbols_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  SymbolStream stream;
  bool have_total = false;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      std::istringstream fields{std::string(text.substr(1))};
      std::string field;
      while (fields >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        try {
          if (key == "bit_depth") stream.bit_depth = std::stoi(value);
          if (key == "total_input") {
            stream.total_input = std::stoull(value);
            have_total = true;
          }
        } catch (const std::exception&) {
          throw ParseError("malformed header field '" + field + "'", line_number);
        }
      }
      continue;
    }
    unsigned value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || value > 0xFFFFu) {
      throw ParseError("malformed symbol '" + std::string(text) + "'", line_number);
    }
    stream.symbols.push_back(static_cast<std::uint16_t>(value));
  }
  stream.accepted_count = stream.symbols.size();
  if (!have_total) stream.total_input = stream.symbols.size();
  return stream;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  finish(out, path);
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_assignment_log(const std::filesystem::path& path, std::span<const BinAssignment> log) {
  auto out = open_out(path);
  out << "measurement_index,channel,bin_index,bin_probability,accepted\n";
  for (const BinAssignment& a : log) {
    out << a.measurement_index << ',' << to_string(a.channel) << ',' << a.bin_index << ','
        << format_double(a.bin_probability) << ',' << (a.accepted ? 1 : 0) << '\n';
  }
  finish(out, path);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

OutputTransaction::~OutputTransaction() {
  if (committed_) return;
  for (const auto& file : files_) {
    std::error_code ec;
    std::filesystem::remove(file, ec);
  }
}

std::filesystem::path OutputTransaction::add(std::filesystem::path path) {
  files_.push_back(std::move(path));
  return files_.back();
}

}  // namespace qbin
