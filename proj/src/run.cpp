#include "anticorr/run.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

#include "anticorr/error.hpp"

namespace anticorr {
namespace {

// Walks one YAML mapping, rejecting keys that the schema does not list.
class Section {
 public:
  Section(const YAML::Node& node, std::string path, std::set<std::string> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_) return;
    if (!node_.IsMap()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected a mapping");
    for (const auto& entry : node_) {
      const auto key = entry.first.as<std::string>();
      if (!allowed.contains(key)) throw ConfigError(field(key), "unknown key");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node child(const std::string& key) const {
    if (!node_ || !node_.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    return node_[key];
  }

  template <class T>
  void read(const std::string& key, T& out) const {
    const auto value = child(key);
    if (!value) return;
    try {
      out = value.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(field(key), "has the wrong type");
    }
  }

  void read(const std::string& key, std::array<double, kChannelCount>& out) const {
    const auto value = child(key);
    if (!value) return;
    try {
      if (value.IsScalar()) {
        out.fill(value.as<double>());
        return;
      }
      if (!value.IsSequence() || value.size() != kChannelCount) {
        throw ConfigError(field(key), "expected one number or a list of three");
      }
      for (std::size_t i = 0; i < kChannelCount; ++i) out[i] = value[i].as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError(field(key), "has the wrong type");
    }
  }

  std::string string_or(const std::string& key, const std::string& fallback) const {
    std::string s = fallback;
    read(key, s);
    return s;
  }

 private:
  YAML::Node node_;
  std::string path_;
};

void read_envelope(const YAML::Node& node, const std::string& path, EnvelopeSpec& envelope) {
  const Section s(node, path, {"shape", "width", "amplitude"});
  if (const auto shape = s.child("shape")) {
    try {
      envelope.shape = parse_envelope_shape(shape.as<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(s.field("shape"), e.what());
    }
  }
  s.read("width", envelope.width);
  s.read("amplitude", envelope.amplitude);
}

template <class Parse>
auto parse_enum(const Section& s, const std::string& key, Parse parse, decltype(parse("")) fallback) {
  const auto node = s.child(key);
  if (!node) return fallback;
  try {
    return parse(node.as<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError(s.field(key), e.what());
  }
}

nlohmann::json envelope_json(const EnvelopeSpec& e) {
  return {{"shape", std::string(to_string(e.shape))}, {"width", e.width}, {"amplitude", e.amplitude}};
}

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

double metadata_floor(const RunMetadata& meta) {
  const auto& c = meta.config;
  if (c.contains("window") && c["window"].contains("intensity_floor")) {
    return c["window"]["intensity_floor"].get<double>();
  }
  return 1e-4;
}

}  // namespace

std::string_view to_string(Species species) {
  switch (species) {
    case Species::photon:
      return "photon";
    case Species::electron:
      return "electron";
    case Species::atom:
      return "atom";
  }
  return "photon";
}

Species parse_species(std::string_view name) {
  if (name == "photon") return Species::photon;
  if (name == "electron") return Species::electron;
  if (name == "atom") return Species::atom;
  throw std::invalid_argument("unknown species '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  source.validate();
  apparatus.validate();
  planck.validate();
  if (!(window.alpha > 0.0) || !std::isfinite(window.alpha)) {
    throw ConfigError("window.alpha", "must be finite and > 0");
  }
  if (!(intensity_floor >= 0.0 && intensity_floor <= 1.0)) {
    throw ConfigError("window.intensity_floor", "must lie in [0, 1]");
  }
  if (threads == 0) throw ConfigError("threads", "must be >= 1");
  if (output_dir.empty()) throw ConfigError("output.dir", "must not be empty");
}

RunConfig default_run_config(Species species) {
  RunConfig c;
  c.species = species;
  // Packet width, emission rate, run length and fill gain per preset. The
  // fill gain puts about half an expected dot per packet on each green arm.
  double width = 1e-9;
  double rate = 1e3;
  double duration = 100.0;
  switch (species) {
    case Species::photon:
      break;
    case Species::electron:
      width = 1e-8;
      rate = 1e2;
      duration = 1e3;
      break;
    case Species::atom:
      width = 1e-6;
      rate = 1e1;
      duration = 1e4;
      break;
  }
  c.source.emission_rate = rate;
  c.source.run_duration = duration;
  c.source.blue = EnvelopeSpec{EnvelopeShape::gaussian, width, 1.0};
  c.source.green = c.source.blue;
  c.planck.fill_gain = 0.4 / width;
  c.window.alpha = 10.0 * width;
  return c;
}

RunConfig parse_run_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("<file>", std::string("not valid YAML: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  const Section top(root, "",
                    {"species", "model", "seed", "threads", "source", "apparatus", "planck",
                     "window", "output"});

  RunConfig c = default_run_config(parse_enum(top, "species", parse_species, Species::photon));
  c.model = parse_enum(top, "model", parse_physics_model, c.model);
  top.read("seed", c.seed);
  top.read("threads", c.threads);

  const Section source(top.child("source"), "source",
                       {"emission_rate", "run_duration", "envelope", "blue_envelope", "green_envelope"});
  source.read("emission_rate", c.source.emission_rate);
  source.read("run_duration", c.source.run_duration);
  if (const auto both = source.child("envelope")) {
    read_envelope(both, "source.envelope", c.source.blue);
    read_envelope(both, "source.envelope", c.source.green);
  }
  read_envelope(source.child("blue_envelope"), "source.blue_envelope", c.source.blue);
  read_envelope(source.child("green_envelope"), "source.green_envelope", c.source.green);

  const Section apparatus(top.child("apparatus"), "apparatus",
                          {"transmittance", "path_delays", "efficiencies", "dead_time", "signal_latency"});
  apparatus.read("transmittance", c.apparatus.transmittance);
  apparatus.read("path_delays", c.apparatus.path_delays);
  apparatus.read("efficiencies", c.apparatus.efficiencies);
  apparatus.read("dead_time", c.apparatus.dead_times);
  apparatus.read("signal_latency", c.apparatus.signal_latency);

  const Section planck(top.child("planck"), "planck", {"absorbers", "fill_gain"});
  planck.read("absorbers", c.planck.absorbers);
  planck.read("fill_gain", c.planck.fill_gain);

  const Section window(top.child("window"), "window", {"alpha", "intensity_floor"});
  window.read("alpha", c.window.alpha);
  window.read("intensity_floor", c.intensity_floor);

  const Section output(top.child("output"), "output", {"dir", "format"});
  output.read("dir", c.output_dir);
  const auto format = output.string_or("format", "json");
  if (format == "json") {
    c.format = ReportFormat::json;
  } else if (format == "csv") {
    c.format = ReportFormat::csv;
  } else {
    throw ConfigError("output.format", "must be json or csv");
  }

  c.apparatus.model = c.model;
  c.source.seed = c.seed;
  c.validate();
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  return {
      {"species", std::string(to_string(c.species))},
      {"model", std::string(to_string(c.model))},
      {"seed", c.seed},
      {"source",
       {{"emission_rate", c.source.emission_rate},
        {"run_duration", c.source.run_duration},
        {"blue_envelope", envelope_json(c.source.blue)},
        {"green_envelope", envelope_json(c.source.green)}}},
      {"apparatus",
       {{"transmittance", c.apparatus.transmittance},
        {"path_delays", c.apparatus.path_delays},
        {"efficiencies", c.apparatus.efficiencies},
        {"dead_time", c.apparatus.dead_times},
        {"signal_latency", c.apparatus.signal_latency}}},
      {"planck", {{"absorbers", c.planck.absorbers}, {"fill_gain", c.planck.fill_gain}}},
      {"window", {{"alpha", c.window.alpha}, {"intensity_floor", c.intensity_floor}}},
  };
}

EventStreams simulate(const RunConfig& config) {
  config.validate();
  SourceConfig source = config.source;
  source.seed = config.seed;
  ApparatusConfig apparatus = config.apparatus;
  apparatus.model = config.model;

  const auto pairs = generate_emissions(source, config.threads);
  auto streams = config.model == PhysicsModel::copenhagen
                     ? detect_copenhagen(pairs, apparatus, config.seed)
                     : detect_planck(pairs, apparatus, config.planck, config.seed, config.threads > 1);

  auto meta = streams.metadata();
  meta.model = std::string(to_string(config.model));
  meta.seed = config.seed;
  meta.run_duration = source.run_duration;
  meta.emission_rate = source.emission_rate;
  meta.packet_support = source.packet_support();
  meta.alpha = config.window.alpha;
  meta.config = to_json(config);
  streams.set_metadata(std::move(meta));
  return streams;
}

CoincidenceReport analyze(const EventStreams& streams, std::optional<double> alpha,
                          std::optional<double> intensity_floor) {
  if (!alpha) alpha = streams.metadata().alpha;
  if (!alpha) throw ConfigError("window.alpha", "not given and not recorded in the stream");
  if (!(*alpha > 0.0)) throw ConfigError("window.alpha", "must be > 0");
  return estimate_p(streams, WindowConfig{*alpha, 0.0}, std::nullopt,
                    intensity_floor.value_or(metadata_floor(streams.metadata())));
}

ExperimentResult run_experiment(const RunConfig& config) {
  auto streams = simulate(config);
  auto report = analyze(streams, config.window.alpha, config.intensity_floor);
  return {std::move(streams), std::move(report)};
}

nlohmann::json report_document(const CoincidenceReport& report, const EventStreams& streams) {
  return {{"report", to_json(report)}, {"run", to_json(streams.metadata())}};
}

std::string report_csv(const CoincidenceReport& r) {
  std::ostringstream out;
  out << "n0,alpha,p1,p1_lo,p1_hi,p2,p2_lo,p2_hi,p3,p3_lo,p3_hi,p1p2,p1p2_se,"
         "difference_se,p0,verdict,low_intensity\n";
  out << r.n0 << ',' << format_double(r.alpha_used);
  for (const auto* e : {&r.p1, &r.p2, &r.p3}) {
    out << ',' << format_double(e->value) << ',' << format_double(e->interval.lower) << ','
        << format_double(e->interval.upper);
  }
  out << ',' << format_double(r.product.value) << ',' << format_double(r.product.standard_error)
      << ',' << format_double(r.difference_standard_error) << ','
      << format_double(r.p0_theoretical) << ',' << to_string(r.verdict) << ','
      << (r.intensity.flagged ? "true" : "false") << '\n';
  return out.str();
}

ShapeScanResult run_shape_scan(const RunConfig& config, std::span<const double> shifts) {
  if (config.apparatus.transmittance != 1.0) {
    throw ConfigError("apparatus.transmittance", "shape scan needs 1 (mirror removed)");
  }
  ShapeScanResult result;
  result.shape = config.source.green.shape;
  result.configured_width = config.source.green.width;
  result.recovered_width = std::numeric_limits<double>::quiet_NaN();
  result.peak_shift = std::numeric_limits<double>::quiet_NaN();
  if (shifts.empty()) {
    config.validate();
    return result;
  }

  const auto streams = simulate(config);
  const double alpha = config.window.alpha;
  result.points = shape_scan(streams, alpha, shifts);
  result.peak_shift = scan_peak_shift(result.points);
  if (result.points.size() >= 3) {
    if (result.shape == EnvelopeShape::gaussian) {
      const EnvelopeSpec unit{EnvelopeShape::gaussian, 1.0, 1.0};
      const double trigger_sigma =
          std::sqrt(config.source.blue.profile_variance() / unit.profile_variance());
      result.recovered_width = recover_gaussian_sigma(result.points, alpha, trigger_sigma);
    } else {
      result.recovered_width = scan_half_max_width(result.points);
    }
  }
  return result;
}

std::string shape_scan_csv(std::span<const ShapePoint> points) {
  std::ostringstream out;
  out << "s,p,ci_lower,ci_upper,hits\n";
  for (const auto& p : points) {
    out << format_double(p.shift) << ',' << format_double(p.value) << ','
        << format_double(p.interval.lower) << ',' << format_double(p.interval.upper) << ','
        << p.hits << '\n';
  }
  return out.str();
}

std::string shape_scan_summary(const ShapeScanResult& r) {
  std::ostringstream out;
  out << "envelope shape:   " << to_string(r.shape) << '\n';
  out << "points scanned:   " << r.points.size() << '\n';
  if (r.points.empty()) return out.str();
  const char* what = r.shape == EnvelopeShape::gaussian ? "sigma" : "duration (FWHM)";
  out << "peak shift:       " << format_double(r.peak_shift) << " s\n";
  out << "configured " << what << ": " << format_double(r.configured_width) << " s\n";
  out << "recovered " << what << ":  " << format_double(r.recovered_width) << " s\n";
  if (std::isfinite(r.recovered_width)) {
    out << "relative error:   "
        << format_double((r.recovered_width - r.configured_width) / r.configured_width) << '\n';
  }
  return out.str();
}

}  // namespace anticorr
