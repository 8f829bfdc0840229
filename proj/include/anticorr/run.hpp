#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "anticorr/apparatus.hpp"
#include "anticorr/coincidence.hpp"
#include "anticorr/poisson_check.hpp"
#include "anticorr/source.hpp"
#include "anticorr/timetag.hpp"
#include "json.hpp"

namespace anticorr {

/// Particle presets. They only change packet width, emission rate and the
/// default window; detector physics is the same for all of them.
enum class Species { photon, electron, atom };

std::string_view to_string(Species species);
Species parse_species(std::string_view name);

enum class ReportFormat { json, csv };

struct RunConfig {
  Species species = Species::photon;
  PhysicsModel model = PhysicsModel::copenhagen;
  std::uint64_t seed = 1;
  SourceConfig source;
  ApparatusConfig apparatus;
  PlanckConfig planck;
  WindowConfig window;
  double intensity_floor = 1e-4;
  std::string output_dir = "anticorr-out";
  ReportFormat format = ReportFormat::json;
  unsigned threads = 1;

  /// Throws ConfigError with the dotted field name of the first problem.
  void validate() const;
};

/// Defaults for a species preset (the photon preset is the default run).
RunConfig default_run_config(Species species = Species::photon);

/// Parses a YAML run configuration. Unknown keys and out-of-range values
/// raise ConfigError naming the field. Omitted entries keep the preset
/// defaults of the file's `species`.
RunConfig parse_run_config(std::string_view yaml_text);

nlohmann::json to_json(const RunConfig& config);

/// Source and apparatus simulation for the configured model. Metadata
/// embeds the full configuration; identical configs give identical streams.
EventStreams simulate(const RunConfig& config);

/// Analysis from a stream alone: alpha, p0 and the intensity floor come
/// from its metadata unless given.
CoincidenceReport analyze(const EventStreams& streams, std::optional<double> alpha = std::nullopt,
                          std::optional<double> intensity_floor = std::nullopt);

struct ExperimentResult {
  EventStreams streams;
  CoincidenceReport report;
};

ExperimentResult run_experiment(const RunConfig& config);

/// Report JSON with the stream metadata (and so the config) embedded.
nlohmann::json report_document(const CoincidenceReport& report, const EventStreams& streams);

/// One header line plus one row of the headline numbers.
std::string report_csv(const CoincidenceReport& report);

struct ShapeScanResult {
  std::vector<ShapePoint> points;
  EnvelopeShape shape = EnvelopeShape::gaussian;
  double configured_width = 0.0;
  double recovered_width = 0.0;
  double peak_shift = 0.0;
};

/// Packet profiling: simulates with the mirror removed and
/// scans p(s). Throws ConfigError unless apparatus.transmittance == 1.
/// An empty grid yields an empty scan with no width estimate.
ShapeScanResult run_shape_scan(const RunConfig& config, std::span<const double> shifts);

std::string shape_scan_csv(std::span<const ShapePoint> points);
std::string shape_scan_summary(const ShapeScanResult& result);

}  // namespace anticorr
