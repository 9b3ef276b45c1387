#include "qbin/cli.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbin/diagnostics.hpp"
#include "qbin/errors.hpp"
#include "qbin/homodyne_model.hpp"
#include "qbin/pipeline.hpp"
#include "qbin/toa_model.hpp"

namespace qbin::cli {
namespace {

using nlohmann::json;

void require(bool ok, const std::string& constraint) {
  if (!ok) throw UsageError("invalid arguments: " + constraint);
}

json chi_json(const std::optional<ChiSquareResult>& chi) {
  if (!chi) return nullptr;
  return {{"statistic", chi->statistic}, {"p_value", chi->p_value}, {"dof", chi->dof}};
}

json report_json(const DiagnosticsReport& r) {
  return {
      {"bit_depth", r.bit_depth},
      {"total_input", r.total_input},
      {"accepted", r.accepted},
      {"acceptance_fraction", r.acceptance_fraction},
      {"entropy_bits", r.entropy_bits},
      {"entropy_per_bit", r.entropy_per_bit},
      {"kl_to_uniform_bits", r.kl_to_uniform_bits},
      {"chi_square", chi_json(r.chi_square)},
      {"chi_square_p_value", r.chi_square ? json(r.chi_square->p_value) : json(nullptr)},
  };
}

std::filesystem::path sibling(const std::filesystem::path& base, const std::string& suffix) {
  std::filesystem::path p = base;
  p.replace_extension(suffix);
  return p;
}

std::string histogram_csv(const std::vector<std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (const auto c : counts) total += c;
  std::ostringstream out;
  out << "symbol,count,probability\n";
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double p = total == 0 ? 0.0 : static_cast<double>(counts[k]) / static_cast<double>(total);
    out << k << ',' << counts[k] << ',' << format_double(p) << '\n';
  }
  return out.str();
}

// -- bin ------------------------------------------------------------------

template <typename M>
PipelineResult<typename M::Stats> run_model(std::span<const double> samples, const M& model,
                                            const RunConfig& config) {
  BinningConfig binning{config.bit_depth, config.acceptance_prob, config.method};
  if (config.online) return online_update_mode(samples, model, binning);
  return run_pipeline(samples, model, binning, config.fixed_parameter);
}

template <typename Stats>
void write_bin_outputs(const RunConfig& config, const PipelineResult<Stats>& result, json report) {
  report["method"] = to_string(config.method);
  report["model"] = to_string(config.model);
  report["acceptance_prob"] = config.acceptance_prob;
  report["seed"] = config.seed;
  report["online"] = config.online;
  if (result.parameter) report["parameter"] = *result.parameter;

  OutputTransaction tx;
  write_bytes(tx.add(config.output_path), pack_bits(result.stream));
  write_symbols_csv(tx.add(sibling(config.output_path, ".symbols.csv")), result.stream);
  write_assignment_log(tx.add(sibling(config.output_path, ".assignments.csv")), result.assignments);
  write_text(tx.add(sibling(config.output_path, ".diagnostics.json")), report.dump(2) + "\n");
  tx.commit();
}

int command_bin(const RunConfig& config, std::ostream& out) {
  MeasurementRecord record = read_record(config.input_path, config.model);
  DiagnosticsReport summary;
  if (config.model == ModelKind::toa) {
    const toa::Config model_config{config.tau_a, config.jitter_sigma};
    const toa::Model model(model_config);
    auto filtered = toa::filter_afterpulse(record.samples, model_config);
    const auto result = run_model(filtered.samples, model, config);
    summary = diagnose(result.stream);
    json report = report_json(summary);
    report["tau_a"] = config.tau_a;
    report["removed_afterpulses"] = filtered.removed;
    report["sufficient_statistics"] = {{"n", result.stats.n}, {"S", result.stats.S()}};
    write_bin_outputs(config, result, report);
  } else {
    const homodyne::Model model;
    const auto result = run_model(record.samples, model, config);
    summary = diagnose(result.stream);
    json report = report_json(summary);
    report["sufficient_statistics"] = {{"n", result.stats.n}, {"X", result.stats.X()}};
    json channels;
    for (const Channel channel : {Channel::parametric, Channel::angle}) {
      const auto symbols = channel_symbols(result.assignments, channel);
      channels[to_string(channel)] = report_json(diagnose(symbols, config.bit_depth, record.samples.size() / 2));
    }
    report["channels"] = channels;
    write_bin_outputs(config, result, report);
  }
  out << "accepted " << summary.accepted << " of " << summary.total_input << " inputs; entropy per bit "
      << std::setprecision(7) << summary.entropy_per_bit << '\n';
  return 0;
}

// -- replication ----------------------------------------------------------

ReplicationRow make_row(std::string method, std::string channel, int bits, std::span<const std::uint16_t> symbols,
                        std::size_t total_input) {
  ReplicationRow row;
  row.method = std::move(method);
  row.channel = std::move(channel);
  row.bit_depth = bits;
  const DiagnosticsReport r = diagnose(symbols, bits, total_input);
  row.accepted = r.accepted;
  row.total_input = r.total_input;
  row.entropy_per_bit = r.entropy_per_bit;
  row.kl_to_uniform_bits = r.kl_to_uniform_bits;
  if (r.chi_square) row.chi_square_p = r.chi_square->p_value;
  row.histogram = SymbolHistogram::of(symbols, std::size_t{1} << bits).counts;
  return row;
}

void print_replication(const Replication& rep, std::ostream& out) {
  out << rep.name << " (seed " << rep.seed << ", " << rep.sample_count << " samples, MLE "
      << std::setprecision(6) << rep.estimate << ")\n";
  out << std::left << std::setw(19) << "method" << std::setw(12) << "channel" << std::setw(6) << "bits"
      << std::setw(10) << "accepted" << std::setw(10) << "total" << std::setw(12) << "H/bit" << std::setw(12)
      << "ref acc." << "ref H/bit\n";
  for (const auto& row : rep.rows) {
    out << std::left << std::setw(19) << row.method << std::setw(12) << row.channel << std::setw(6)
        << row.bit_depth << std::setw(10) << row.accepted << std::setw(10) << row.total_input << std::setw(12)
        << std::fixed << std::setprecision(7) << row.entropy_per_bit << std::setw(12)
        << (row.reference_accepted ? std::to_string(*row.reference_accepted) : "-");
    if (row.reference_entropy_per_bit) {
      out << *row.reference_entropy_per_bit;
    } else {
      out << '-';
    }
    out << '\n' << std::defaultfloat;
  }
}

void write_replication(const Replication& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  OutputTransaction tx;
  std::ostringstream csv;
  csv << "method,channel,bit_depth,accepted,total_input,entropy_per_bit,kl_to_uniform_bits,chi_square_p,"
         "reference_accepted,reference_entropy_per_bit\n";
  json rows = json::array();
  for (const auto& row : rep.rows) {
    csv << row.method << ',' << row.channel << ',' << row.bit_depth << ',' << row.accepted << ','
        << row.total_input << ',' << format_double(row.entropy_per_bit) << ','
        << format_double(row.kl_to_uniform_bits) << ','
        << (row.chi_square_p ? format_double(*row.chi_square_p) : "") << ','
        << (row.reference_accepted ? std::to_string(*row.reference_accepted) : "") << ','
        << (row.reference_entropy_per_bit ? format_double(*row.reference_entropy_per_bit) : "") << '\n';
    rows.push_back({{"method", row.method},
                    {"channel", row.channel},
                    {"bit_depth", row.bit_depth},
                    {"accepted", row.accepted},
                    {"total_input", row.total_input},
                    {"entropy_per_bit", row.entropy_per_bit},
                    {"kl_to_uniform_bits", row.kl_to_uniform_bits},
                    {"chi_square_p_value", row.chi_square_p ? json(*row.chi_square_p) : json(nullptr)},
                    {"reference_accepted", row.reference_accepted ? json(*row.reference_accepted) : json(nullptr)},
                    {"reference_entropy_per_bit",
                     row.reference_entropy_per_bit ? json(*row.reference_entropy_per_bit) : json(nullptr)}});
    const std::string hist_name = rep.name + "_" + row.method + "_" + std::to_string(row.bit_depth) + "bit_" +
                                  row.channel + "_hist.csv";
    write_text(tx.add(dir / hist_name), histogram_csv(row.histogram));
  }
  write_text(tx.add(dir / (rep.name + "_summary.csv")), csv.str());
  const json summary = {{"name", rep.name},
                        {"seed", rep.seed},
                        {"sample_count", rep.sample_count},
                        {"estimate", rep.estimate},
                        {"rows", rows}};
  write_text(tx.add(dir / (rep.name + "_summary.json")), summary.dump(2) + "\n");
  tx.commit();
}

int command_replicate(const Replication& rep, const RunConfig& config, std::ostream& out) {
  print_replication(rep, out);
  if (!config.output_path.empty()) write_replication(rep, config.output_path);
  return 0;
}

}  // namespace

const ReplicationRow& Replication::row(const std::string& method, int bit_depth, const std::string& channel) const {
  for (const auto& r : rows) {
    if (r.method == method && r.bit_depth == bit_depth && r.channel == channel) return r;
  }
  throw ContractError("no replication row for " + method + "/" + channel + "/" + std::to_string(bit_depth));
}

Replication replicate_toa(const RunConfig& config) {
  static const std::map<std::pair<std::string, int>, std::pair<std::optional<std::size_t>, double>> reference = {
      {{"conventional", 4}, {std::nullopt, 0.999966}}, {{"conventional", 7}, {std::nullopt, 0.999314}},
      {{"conventional", 8}, {std::nullopt, 0.998070}}, {{"bayesian", 4}, {215'538, 0.999914}},
      {{"bayesian", 7}, {172'736, 0.997237}},          {{"bayesian", 8}, {122'927, 0.981067}},
  };
  const toa::Config model_config{config.tau_a, 0.0};
  const toa::Model model(model_config);
  const std::vector<double> samples = toa::simulate(config.sample_count, config.theta, model_config, config.seed);

  Replication rep;
  rep.name = "toa";
  rep.seed = config.seed;
  rep.sample_count = samples.size();
  rep.estimate = toa::mle(toa::accumulate(samples, model_config));
  for (const int bits : {4, 7, 8}) {
    struct Variant {
      const char* name;
      Method method;
      std::optional<double> parameter;
    };
    for (const Variant& v : {Variant{"conventional", Method::conventional_mle, std::nullopt},
                             Variant{"conventional-true", Method::conventional_mle, config.theta},
                             Variant{"bayesian", Method::bayesian, std::nullopt}}) {
      const auto result =
          run_pipeline(samples, model, BinningConfig{bits, config.acceptance_prob, v.method}, v.parameter);
      ReplicationRow row = make_row(v.name, "parametric", bits, result.stream.symbols, samples.size());
      if (const auto it = reference.find({v.name, bits}); it != reference.end()) {
        row.reference_accepted = it->second.first;
        row.reference_entropy_per_bit = it->second.second;
      }
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

Replication replicate_homodyne(const RunConfig& config) {
  static const std::map<int, double> reference = {{6, 0.9945876}, {7, 0.8668848}};
  const homodyne::Model model;
  const std::vector<double> samples =
      homodyne::simulate(config.sample_count, config.sigma_vac, config.sigma_e, config.seed);
  const double true_variance = config.sigma_vac * config.sigma_vac + config.sigma_e * config.sigma_e;
  const std::size_t pairs = samples.size() / 2;

  Replication rep;
  rep.name = "homodyne";
  rep.seed = config.seed;
  rep.sample_count = samples.size();
  rep.estimate = homodyne::mle(homodyne::accumulate(samples));
  for (const int bits : {6, 7}) {
    struct Variant {
      const char* name;
      Method method;
      std::optional<double> parameter;
    };
    for (const Variant& v : {Variant{"conventional", Method::conventional_mle, std::nullopt},
                             Variant{"conventional-true", Method::conventional_mle, true_variance},
                             Variant{"bayesian", Method::bayesian, std::nullopt}}) {
      const auto result =
          run_pipeline(samples, model, BinningConfig{bits, config.acceptance_prob, v.method}, v.parameter);
      ReplicationRow radial = make_row(v.name, "parametric", bits,
                                       channel_symbols(result.assignments, Channel::parametric), pairs);
      if (v.method == Method::bayesian) {
        radial.reference_entropy_per_bit = reference.at(bits);
      }
      rep.rows.push_back(std::move(radial));
      rep.rows.push_back(
          make_row(v.name, "angle", bits, channel_symbols(result.assignments, Channel::angle), pairs));
      rep.rows.push_back(make_row(v.name, "combined", bits, result.stream.symbols, samples.size()));
    }
  }
  return rep;
}

RunConfig parse_and_validate(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"Converts continuous QRNG measurement records into uniform symbols"};
  app.require_subcommand(0, 1);

  std::string model = "toa";
  std::string method = "bayesian";

  auto* sim_toa = app.add_subcommand("simulate-toa", "Simulate a time-of-arrival record");
  auto* sim_toa_count = sim_toa->add_option("-n,--count", cfg.sample_count, "Number of samples");
  sim_toa->add_option("--theta", cfg.theta, "Detection rate in 1/s");
  auto* sim_toa_tau = sim_toa->add_option("--tau-a", cfg.tau_a, "Afterpulse cut in s");
  sim_toa->add_option("--jitter", cfg.jitter_sigma, "Timing jitter sigma in s");
  sim_toa->add_option("--afterpulse-fraction", cfg.afterpulse_fraction, "Fraction of injected afterpulses");
  sim_toa->add_option("--seed", cfg.seed, "Generator seed");
  sim_toa->add_option("-o,--output", cfg.output_path, "Record CSV to write")->required();

  auto* sim_hd = app.add_subcommand("simulate-homodyne", "Simulate a vacuum-quadrature record");
  auto* sim_hd_count = sim_hd->add_option("-n,--count", cfg.sample_count, "Number of samples");
  sim_hd->add_option("--sigma-vac", cfg.sigma_vac, "Vacuum quadrature sigma");
  sim_hd->add_option("--sigma-e", cfg.sigma_e, "Electronic noise sigma");
  sim_hd->add_option("--seed", cfg.seed, "Generator seed");
  sim_hd->add_option("-o,--output", cfg.output_path, "Record CSV to write")->required();

  auto* bin = app.add_subcommand("bin", "Convert a record into symbols");
  bin->add_option("--model", model, "toa or homodyne")->check(CLI::IsMember({"toa", "homodyne"}));
  bin->add_option("--method", method, "bayesian or conventional")
      ->check(CLI::IsMember({"bayesian", "conventional"}));
  bin->add_option("--bits", cfg.bit_depth, "Bits per symbol (1..16)");
  bin->add_option("--pa", cfg.acceptance_prob, "Acceptance probability in (0.5, 1]");
  bin->add_option("--tau-a", cfg.tau_a, "Afterpulse cut in s (toa)");
  bin->add_option("--parameter", cfg.fixed_parameter,
                  "Fixed parameter for the conventional method (rate for toa, variance for homodyne)");
  bin->add_flag("--online", cfg.online, "Update the posterior after every measurement");
  bin->add_option("--seed", cfg.seed, "Seed recorded in the diagnostics");
  bin->add_option("-i,--input", cfg.input_path, "Record CSV")->required();
  bin->add_option("-o,--output", cfg.output_path, "Packed-bit output; sibling files get the other outputs")
      ->required();

  auto* diag = app.add_subcommand("diagnose", "Entropy and uniformity of a symbols CSV");
  auto* diag_bits = diag->add_option("--bits", cfg.bit_depth, "Bits per symbol (overrides the file header)");
  diag->add_option("-i,--input", cfg.input_path, "Symbols CSV")->required();
  diag->add_option("-o,--output", cfg.output_path, "JSON report (stdout if omitted)");

  auto* bias = app.add_subcommand("bias-demo", "Binning bias from a mis-estimated exponential rate");
  bias->add_option("-o,--output", cfg.output_path, "CSV of the bin distributions");

  auto* rep_toa = app.add_subcommand("replicate-toa", "Seeded time-of-arrival replication");
  auto* rep_toa_count = rep_toa->add_option("-n,--count", cfg.sample_count, "Filtered sample count");
  auto* rep_toa_tau = rep_toa->add_option("--tau-a", cfg.tau_a, "Afterpulse cut in s");
  rep_toa->add_option("--theta", cfg.theta, "Detection rate in 1/s");
  rep_toa->add_option("--pa", cfg.acceptance_prob, "Acceptance probability in (0.5, 1]");
  rep_toa->add_option("--seed", cfg.seed, "Generator seed");
  rep_toa->add_option("-o,--output", cfg.output_path, "Directory for tables and histograms");

  auto* rep_hd = app.add_subcommand("replicate-homodyne", "Seeded vacuum-homodyne replication");
  auto* rep_hd_count = rep_hd->add_option("-n,--count", cfg.sample_count, "Sample count");
  rep_hd->add_option("--sigma-vac", cfg.sigma_vac, "Vacuum quadrature sigma");
  rep_hd->add_option("--sigma-e", cfg.sigma_e, "Electronic noise sigma");
  rep_hd->add_option("--pa", cfg.acceptance_prob, "Acceptance probability in (0.5, 1]");
  rep_hd->add_option("--seed", cfg.seed, "Generator seed");
  rep_hd->add_option("-o,--output", cfg.output_path, "Directory for tables and histograms");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    for (CLI::App* sub : app.get_subcommands()) target = sub;
    cfg.command = Command::help;
    cfg.help_text = target->help();
    return cfg;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (app.get_subcommands().empty()) {
    throw UsageError("a subcommand is required\n" + app.help());
  }
  const CLI::App* sub = app.get_subcommands().front();
  cfg.model = model == "homodyne" ? ModelKind::homodyne : ModelKind::toa;
  cfg.method = method == "conventional" ? Method::conventional_mle : Method::bayesian;

  if (sub == sim_toa) {
    cfg.command = Command::simulate_toa;
    if (sim_toa_count->count() == 0) cfg.sample_count = kReferenceToaCount;
    if (sim_toa_tau->count() == 0) cfg.tau_a = kReferenceTauA;
  } else if (sub == sim_hd) {
    cfg.command = Command::simulate_homodyne;
    cfg.model = ModelKind::homodyne;
    if (sim_hd_count->count() == 0) cfg.sample_count = kReferenceHomodyneCount;
  } else if (sub == bin) {
    cfg.command = Command::bin;
  } else if (sub == diag) {
    cfg.command = Command::diagnose;
    if (diag_bits->count() == 0) cfg.bit_depth = 0;
  } else if (sub == bias) {
    cfg.command = Command::bias_demo;
  } else if (sub == rep_toa) {
    cfg.command = Command::replicate_toa;
    if (rep_toa_count->count() == 0) cfg.sample_count = kReferenceToaCount;
    if (rep_toa_tau->count() == 0) cfg.tau_a = kReferenceTauA;
  } else if (sub == rep_hd) {
    cfg.command = Command::replicate_homodyne;
    cfg.model = ModelKind::homodyne;
    if (rep_hd_count->count() == 0) cfg.sample_count = kReferenceHomodyneCount;
  }

  if (cfg.command != Command::diagnose || cfg.bit_depth != 0) {
    require(cfg.bit_depth >= 1 && cfg.bit_depth <= 16, "--bits must be in 1..16");
  }
  require(cfg.acceptance_prob > 0.5 && cfg.acceptance_prob <= 1.0, "--pa must be in (0.5, 1]");
  require(std::isfinite(cfg.tau_a) && cfg.tau_a >= 0.0, "--tau-a must be finite and >= 0");
  require(std::isfinite(cfg.jitter_sigma) && cfg.jitter_sigma >= 0.0, "--jitter must be finite and >= 0");
  require(std::isfinite(cfg.theta) && cfg.theta > 0.0, "--theta must be positive");
  require(cfg.afterpulse_fraction >= 0.0 && cfg.afterpulse_fraction < 1.0,
          "--afterpulse-fraction must be in [0, 1)");
  require(std::isfinite(cfg.sigma_vac) && cfg.sigma_vac > 0.0, "--sigma-vac must be positive");
  require(std::isfinite(cfg.sigma_e) && cfg.sigma_e >= 0.0, "--sigma-e must be >= 0");
  if (cfg.command == Command::simulate_toa || cfg.command == Command::simulate_homodyne ||
      cfg.command == Command::replicate_toa || cfg.command == Command::replicate_homodyne) {
    require(cfg.sample_count >= 1, "--count must be >= 1");
  }
  if (cfg.fixed_parameter) {
    require(cfg.method == Method::conventional_mle, "--parameter only applies to --method conventional");
    require(std::isfinite(*cfg.fixed_parameter) && *cfg.fixed_parameter > 0.0, "--parameter must be positive");
  }
  if (cfg.online) {
    require(cfg.method == Method::bayesian, "--online requires --method bayesian");
  }
  return cfg;
}

int run(const RunConfig& config, std::ostream& out) {
  switch (config.command) {
    case Command::help:
      out << config.help_text;
      return 0;
    case Command::simulate_toa: {
      const toa::Config model_config{config.tau_a, config.jitter_sigma};
      MeasurementRecord record{ModelKind::toa, toa::simulate(config.sample_count, config.theta, model_config,
                                                             config.seed, {config.afterpulse_fraction})};
      const std::vector<std::string> comments = {
          "seed=" + std::to_string(config.seed) + " theta=" + format_double(config.theta) +
          " tau_a=" + format_double(config.tau_a) + " jitter=" + format_double(config.jitter_sigma) +
          " afterpulse_fraction=" + format_double(config.afterpulse_fraction)};
      OutputTransaction tx;
      write_record(tx.add(config.output_path), record, comments);
      tx.commit();
      out << "wrote " << record.samples.size() << " samples to " << config.output_path.string() << '\n';
      return 0;
    }
    case Command::simulate_homodyne: {
      MeasurementRecord record{ModelKind::homodyne, homodyne::simulate(config.sample_count, config.sigma_vac,
                                                                       config.sigma_e, config.seed)};
      const std::vector<std::string> comments = {"seed=" + std::to_string(config.seed) +
                                                 " sigma_vac=" + format_double(config.sigma_vac) +
                                                 " sigma_e=" + format_double(config.sigma_e)};
      OutputTransaction tx;
      write_record(tx.add(config.output_path), record, comments);
      tx.commit();
      out << "wrote " << record.samples.size() << " samples to " << config.output_path.string() << '\n';
      return 0;
    }
    case Command::bin:
      return command_bin(config, out);
    case Command::diagnose: {
      SymbolStream stream = read_symbols_csv(config.input_path);
      if (config.bit_depth != 0) stream.bit_depth = config.bit_depth;
      if (stream.bit_depth < 1 || stream.bit_depth > 16) {
        throw UsageError("invalid arguments: bit depth missing from the file header; pass --bits");
      }
      const std::string text = report_json(diagnose(stream)).dump(2) + "\n";
      if (config.output_path.empty()) {
        out << text;
      } else {
        OutputTransaction tx;
        write_text(tx.add(config.output_path), text);
        tx.commit();
      }
      return 0;
    }
    case Command::bias_demo: {
      const BiasDemo demo = bias_demo();
      out << std::setprecision(6) << "KL(bins for theta=" << demo.theta_low << " | true " << demo.theta_high
          << ") = " << demo.kl_under_bits << " bits\n"
          << "KL(bins for theta=" << demo.theta_high << " | true " << demo.theta_low
          << ") = " << demo.kl_over_bits << " bits\n";
      if (config.output_path.empty()) {
        out << demo.csv();
      } else {
        OutputTransaction tx;
        write_text(tx.add(config.output_path), demo.csv());
        tx.commit();
      }
      return 0;
    }
    case Command::replicate_toa:
      return command_replicate(replicate_toa(config), config, out);
    case Command::replicate_homodyne:
      return command_replicate(replicate_homodyne(config), config, out);
  }
  return 1;
}

}  // namespace qbin::cli
