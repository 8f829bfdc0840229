#include <algorithm>
#include <cmath>
#include <iterator>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "anticorr/error.hpp"
#include "anticorr/run.hpp"

namespace anticorr {
namespace {

std::string field_of(std::string_view yaml) {
  try {
    parse_run_config(yaml);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

RunConfig small(PhysicsModel model) {
  auto c = default_run_config();
  c.model = model;
  c.apparatus.model = model;
  c.source.run_duration = 5.0;
  return c;
}

TEST(ConfigTest, empty_document_gives_photon_defaults) {
  const auto c = parse_run_config("");
  EXPECT_EQ(c.species, Species::photon);
  EXPECT_EQ(c.model, PhysicsModel::copenhagen);
  EXPECT_DOUBLE_EQ(c.source.green.width, 1e-9);
  EXPECT_DOUBLE_EQ(c.window.alpha, 1e-8);
}

TEST(ConfigTest, parses_nested_sections) {
  const auto c = parse_run_config(R"(
species: electron
model: planck
seed: 9
threads: 3
source: {emission_rate: 50, green_envelope: {shape: rectangular, width: 2.0e-8}}
apparatus: {transmittance: 0.25, dead_time: [1.0e-9, 0, 2.0e-9], efficiencies: [1, 0.5, 0.5]}
planck: {absorbers: 16}
window: {alpha: 3.0e-7, intensity_floor: 0.01}
output: {dir: out, format: csv}
)");
  EXPECT_EQ(c.species, Species::electron);
  EXPECT_EQ(c.apparatus.model, PhysicsModel::planck);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.source.seed, 9u);
  EXPECT_EQ(c.threads, 3u);
  EXPECT_DOUBLE_EQ(c.source.emission_rate, 50.0);
  EXPECT_EQ(c.source.green.shape, EnvelopeShape::rectangular);
  EXPECT_DOUBLE_EQ(c.source.blue.width, 1e-8);
  EXPECT_DOUBLE_EQ(c.apparatus.dead_times[2], 2e-9);
  EXPECT_EQ(c.planck.absorbers, 16u);
  EXPECT_DOUBLE_EQ(c.intensity_floor, 0.01);
  EXPECT_EQ(c.format, ReportFormat::csv);
}

TEST(ConfigTest, scalar_dead_time_applies_to_all_channels) {
  const auto c = parse_run_config("apparatus: {dead_time: 5.0e-9}");
  for (double d : c.apparatus.dead_times) EXPECT_DOUBLE_EQ(d, 5e-9);
}

TEST(ConfigTest, errors_name_the_field) {
  EXPECT_EQ(field_of("source: {emission_rate: 0}"), "source.emission_rate");
  EXPECT_EQ(field_of("source: {emission_rate: fast}"), "source.emission_rate");
  EXPECT_EQ(field_of("apparatus: {transmittance: 2}"), "apparatus.transmittance");
  EXPECT_EQ(field_of("apparatus: {efficiencies: [1, 1.5, 1]}"), "apparatus.efficiencies[1]");
  EXPECT_EQ(field_of("apparatus: {dead_time: [1, 2]}"), "apparatus.dead_time");
  EXPECT_EQ(field_of("window: {alpha: -1}"), "window.alpha");
  EXPECT_EQ(field_of("model: bohr"), "model");
  EXPECT_EQ(field_of("colour: blue"), "colour");
  EXPECT_EQ(field_of("source: {rate: 3}"), "source.rate");
  EXPECT_EQ(field_of("output: {format: xml}"), "output.format");
  EXPECT_EQ(field_of("threads: 0"), "threads");
  EXPECT_EQ(field_of("[unclosed"), "<file>");
}

TEST(SimulateTest, byte_identical_for_identical_config) {
  const auto c = small(PhysicsModel::planck);
  EXPECT_EQ(encode_stream(simulate(c)), encode_stream(simulate(c)));
  auto other = c;
  other.seed = 2;
  EXPECT_NE(encode_stream(simulate(c)), encode_stream(simulate(other)));
}

TEST(SimulateTest, thread_count_does_not_change_output) {
  auto c = small(PhysicsModel::planck);
  auto threaded = c;
  threaded.threads = 4;
  auto a = simulate(c);
  auto b = simulate(threaded);
  EXPECT_EQ(a.channels(), b.channels());
}

TEST(SimulateTest, reanalysis_reproduces_report) {
  const auto c = small(PhysicsModel::copenhagen);
  const auto result = run_experiment(c);
  std::stringstream file;
  write_stream(result.streams, file);
  const auto reread = read_stream(file);
  const auto again = analyze(reread);
  EXPECT_EQ(to_json(again), to_json(result.report));
}

TEST(SimulateTest, metadata_embeds_config) {
  const auto c = small(PhysicsModel::copenhagen);
  const auto s = simulate(c);
  EXPECT_EQ(s.metadata().model, "copenhagen");
  EXPECT_EQ(s.metadata().config, to_json(c));
  EXPECT_DOUBLE_EQ(*s.metadata().alpha, c.window.alpha);
}

TEST(ReportTest, csv_has_header_and_one_row) {
  const auto r = run_experiment(small(PhysicsModel::copenhagen)).report;
  const auto csv = report_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(csv.rfind("n0,alpha,p1,", 0), 0u);
}

TEST(ShapeScanRunTest, requires_mirror_removed) {
  const auto c = small(PhysicsModel::copenhagen);
  const std::vector<double> shifts{0.0};
  try {
    run_shape_scan(c, shifts);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "apparatus.transmittance");
  }
}

TEST(ShapeScanRunTest, empty_grid_gives_header_only_csv) {
  auto c = small(PhysicsModel::copenhagen);
  c.apparatus.transmittance = 1.0;
  const auto result = run_shape_scan(c, std::vector<double>{});
  EXPECT_TRUE(result.points.empty());
  EXPECT_EQ(shape_scan_csv(result.points), "s,p,ci_lower,ci_upper,hits\n");
}

TEST(GoldenTest, golden_config_reproduces_committed_stream) {
  std::ifstream yaml(std::string(ANTICORR_TEST_DATA) + "/golden.yaml");
  std::stringstream text;
  text << yaml.rdbuf();
  const auto streams = simulate(parse_run_config(text.str()));
  std::ifstream golden(std::string(ANTICORR_TEST_DATA) + "/golden.ctag", std::ios::binary);
  ASSERT_TRUE(golden);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(golden)),
                                        std::istreambuf_iterator<char>());
  EXPECT_EQ(encode_stream(streams), bytes);
}

}  // namespace
}  // namespace anticorr
