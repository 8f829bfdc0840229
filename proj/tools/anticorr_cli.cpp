// anticorr: simulate and analyze beam-splitter coincidence runs.
//
//   anticorr simulate     --config run.yaml --out DIR
//   anticorr analyze      DIR/run.ctag [--alpha S] [--format json|csv]
//   anticorr run          --config run.yaml --out DIR
//   anticorr scan-shape   --config scan.yaml --from S --to S --step S
//   anticorr bell-check   m1 m2 m3 a12 a13 a23
//   anticorr poisson-check [--lambda L] [--replications N]
//
// Exit codes: 0 success, 1 configuration error, 2 inconclusive run with
// --fail-inconclusive, 3 I/O failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "anticorr/bell.hpp"
#include "anticorr/error.hpp"
#include "anticorr/poisson_check.hpp"
#include "anticorr/run.hpp"

namespace fs = std::filesystem;
using namespace anticorr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitIo = 3;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::optional<double> alpha;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "YAML run configuration");
  cmd->add_option("--seed", o.seed, "RNG seed (overrides the file)");
  cmd->add_option("--model", o.model, "Detector physics")->check(CLI::IsMember({"copenhagen", "planck"}));
  cmd->add_option("--alpha", o.alpha, "Coincidence half-window in seconds");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--threads", o.threads, "Worker threads for generation");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrorKind::io, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw FormatError(FormatErrorKind::io, "cannot write " + path.string());
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError(FormatErrorKind::io, "cannot create " + dir + ": " + ec.message());
  return dir;
}

RunConfig load_config(const CommonOptions& o) {
  RunConfig c = o.config_path.empty() ? parse_run_config("") : parse_run_config(read_text(o.config_path));
  if (o.seed) c.seed = *o.seed;
  if (o.model) c.model = parse_physics_model(*o.model);
  if (o.alpha) c.window.alpha = *o.alpha;
  if (o.out) c.output_dir = *o.out;
  if (o.format) c.format = *o.format == "csv" ? ReportFormat::csv : ReportFormat::json;
  if (o.threads) c.threads = *o.threads;
  c.apparatus.model = c.model;
  c.source.seed = c.seed;
  c.validate();
  return c;
}

void write_ctag(const fs::path& path, const EventStreams& streams) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(FormatErrorKind::io, "cannot write " + path.string());
  write_stream(streams, out);
}

EventStreams read_ctag(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrorKind::io, "cannot open " + path);
  return read_stream(in);
}

std::string render_report(const CoincidenceReport& report, const EventStreams& streams,
                          ReportFormat format) {
  if (format == ReportFormat::csv) return report_csv(report);
  return report_document(report, streams).dump(2) + "\n";
}

void print_summary(const CoincidenceReport& r) {
  std::cerr << "n0=" << r.n0 << " p1=" << r.p1.value << " p2=" << r.p2.value
            << " p3=" << r.p3.value << " p1p2=" << r.product.value
            << " p0=" << r.p0_theoretical << " verdict=" << to_string(r.verdict) << '\n';
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beam-splitter coincidence simulator and analyzer"};
  app.require_subcommand(1);

  CommonOptions simulate_opts;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a run and write DIR/run.ctag");
  add_common(simulate_cmd, simulate_opts);

  CommonOptions run_opts;
  bool run_fail_inconclusive = false;
  auto* run_cmd = app.add_subcommand("run", "Simulate and analyze in one go");
  add_common(run_cmd, run_opts);
  run_cmd->add_flag("--fail-inconclusive", run_fail_inconclusive, "Exit 2 on an inconclusive verdict");

  CommonOptions analyze_opts;
  std::string analyze_input;
  bool analyze_fail_inconclusive = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "Estimate p1, p2, p3 from a CTAG file");
  analyze_cmd->add_option("input", analyze_input, "CTAG file")->required();
  analyze_cmd->add_option("--alpha", analyze_opts.alpha, "Coincidence half-window in seconds");
  analyze_cmd->add_option("--out", analyze_opts.out, "Output directory (default: stdout)");
  analyze_cmd->add_option("--format", analyze_opts.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));
  analyze_cmd->add_flag("--fail-inconclusive", analyze_fail_inconclusive,
                        "Exit 2 on an inconclusive verdict");

  CommonOptions scan_opts;
  std::optional<double> scan_from, scan_to, scan_step;
  auto* scan_cmd = app.add_subcommand("scan-shape", "Profile the packet shape with p(s)");
  add_common(scan_cmd, scan_opts);
  scan_cmd->add_option("--from", scan_from, "First shift s (seconds)");
  scan_cmd->add_option("--to", scan_to, "Last shift s (seconds)");
  scan_cmd->add_option("--step", scan_step, "Shift step (seconds)");

  std::vector<double> bell_values;
  auto* bell_cmd = app.add_subcommand("bell-check", "Joint-distribution feasibility of a pairwise spec");
  bell_cmd->add_option("values", bell_values, "m1 m2 m3 a12 a13 a23")->expected(6)->required();

  CommonOptions poisson_opts;
  std::optional<std::size_t> poisson_absorbers;
  std::optional<double> poisson_gain, poisson_lambda;
  std::uint64_t poisson_replications = 100000;
  auto* poisson_cmd = app.add_subcommand("poisson-check", "Dot-count law for one replayed packet");
  poisson_cmd->add_option("--config", poisson_opts.config_path, "YAML run configuration");
  poisson_cmd->add_option("--seed", poisson_opts.seed, "RNG seed");
  poisson_cmd->add_option("--out", poisson_opts.out, "Output directory (default: stdout)");
  poisson_cmd->add_option("--absorbers", poisson_absorbers, "Absorbers in the bank");
  poisson_cmd->add_option("--fill-gain", poisson_gain, "Fill gain");
  poisson_cmd->add_option("--lambda", poisson_lambda, "Target expected dot count (sets the fill gain)");
  poisson_cmd->add_option("--replications", poisson_replications, "Fresh banks to replay against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate_cmd) {
      const auto config = load_config(simulate_opts);
      const auto streams = simulate(config);
      const auto dir = prepare_dir(config.output_dir);
      write_ctag(dir / "run.ctag", streams);
      if (config.format == ReportFormat::csv) {
        std::ofstream csv(dir / "events.csv", std::ios::binary);
        write_csv(streams, csv);
      }
      std::cerr << "wrote " << (dir / "run.ctag").string() << " (" << streams.size() << " events)\n";
      return kExitOk;
    }

    if (*run_cmd) {
      const auto config = load_config(run_opts);
      const auto result = run_experiment(config);
      const auto dir = prepare_dir(config.output_dir);
      write_ctag(dir / "run.ctag", result.streams);
      const bool csv = config.format == ReportFormat::csv;
      write_text(dir / (csv ? "report.csv" : "report.json"),
                 render_report(result.report, result.streams, config.format));
      print_summary(result.report);
      if (run_fail_inconclusive && result.report.verdict == Verdict::inconclusive) {
        return kExitInconclusive;
      }
      return kExitOk;
    }

    if (*analyze_cmd) {
      const auto streams = read_ctag(analyze_input);
      const auto report = analyze(streams, analyze_opts.alpha);
      const auto format =
          analyze_opts.format == std::optional<std::string>("csv") ? ReportFormat::csv : ReportFormat::json;
      const auto text = render_report(report, streams, format);
      if (analyze_opts.out) {
        const auto dir = prepare_dir(*analyze_opts.out);
        write_text(dir / (format == ReportFormat::csv ? "report.csv" : "report.json"), text);
      } else {
        std::cout << text;
      }
      print_summary(report);
      if (analyze_fail_inconclusive && report.verdict == Verdict::inconclusive) return kExitInconclusive;
      return kExitOk;
    }

    if (*scan_cmd) {
      const auto config = load_config(scan_opts);
      if (config.apparatus.transmittance != 1.0) {
        throw ConfigError("apparatus.transmittance", "shape scan needs 1 (mirror removed)");
      }
      const double reach = config.source.blue.support() + config.source.green.support() +
                           2.0 * config.window.alpha;
      const double centre = config.apparatus.path_delays[1] - config.apparatus.path_delays[0] +
                            config.source.green.center() - config.source.blue.center();
      const auto grid = shift_grid(scan_from.value_or(centre - reach), scan_to.value_or(centre + reach),
                                   scan_step.value_or(config.window.alpha));
      const auto result = run_shape_scan(config, grid);
      const auto dir = prepare_dir(config.output_dir);
      write_text(dir / "shape_scan.csv", shape_scan_csv(result.points));
      const auto summary = shape_scan_summary(result);
      write_text(dir / "shape_summary.txt", summary);
      std::cout << summary;
      return kExitOk;
    }

    if (*bell_cmd) {
      bell::PairwiseSpec spec;
      for (int i = 0; i < 3; ++i) {
        spec.marginals[i] = bell_values[i];
        spec.agreements[i] = bell_values[3 + i];
      }
      try {
        spec.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError("bell-check", e.what());
      }
      const auto result = bell::check_feasibility(spec);
      std::cout << bell::to_json(result).dump(2) << '\n';
      return kExitOk;
    }

    if (*poisson_cmd) {
      const auto config = load_config(poisson_opts);
      PlanckConfig bank = config.planck;
      bank.absorbers = poisson_absorbers.value_or(kDiagnosticAbsorbers);
      if (poisson_gain) bank.fill_gain = *poisson_gain;
      if (poisson_lambda) {
        if (!(*poisson_lambda >= 0.0)) throw ConfigError("lambda", "must be >= 0");
        bank.fill_gain = *poisson_lambda / config.source.green.energy();
      }
      bank.validate();
      if (poisson_replications < kMinPoissonReplications) {
        throw ConfigError("replications", "insufficient replications: need at least " +
                                              std::to_string(kMinPoissonReplications));
      }
      const auto diagnostic =
          run_poisson_diagnostic(config.source.green, bank, poisson_replications, config.seed);
      const auto text = to_json(diagnostic).dump(2) + "\n";
      if (poisson_opts.out) {
        write_text(prepare_dir(*poisson_opts.out) / "poisson_check.json", text);
      } else {
        std::cout << text;
      }
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
