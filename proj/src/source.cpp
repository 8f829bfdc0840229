#include "anticorr/source.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "anticorr/error.hpp"
#include "anticorr/random.hpp"

namespace anticorr {
namespace {

constexpr double kEventsPerShard = 65536.0;

std::vector<double> shard_times(const SourceConfig& config, std::uint64_t shard,
                                std::uint64_t shard_count) {
  const double span = config.run_duration / static_cast<double>(shard_count);
  const double begin = span * static_cast<double>(shard);
  const double end =
      shard + 1 == shard_count ? config.run_duration : span * static_cast<double>(shard + 1);

  auto engine = make_engine(config.seed, RngStream::emissions, shard);
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(config.emission_rate * span * 1.01) + 16);
  double t = begin;
  for (;;) {
    t += -std::log(uniform_open(engine)) / config.emission_rate;
    if (t >= end) break;
    times.push_back(t);
  }
  return times;
}

}  // namespace

void SourceConfig::validate() const {
  if (!(emission_rate > 0.0) || !std::isfinite(emission_rate)) {
    throw ConfigError("source.emission_rate", "must be finite and > 0");
  }
  if (!(run_duration > 0.0) || !std::isfinite(run_duration)) {
    throw ConfigError("source.run_duration", "must be finite and > 0");
  }
  blue.validate("source.blue_envelope");
  green.validate("source.green_envelope");
}

double SourceConfig::packet_support() const {
  return std::max(blue.support(), green.support());
}

std::uint64_t emission_shard_count(const SourceConfig& config) {
  const double expected = config.emission_rate * config.run_duration;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(expected / kEventsPerShard)));
}

std::vector<WavePacketPair> generate_emissions(const SourceConfig& config, unsigned threads) {
  config.validate();
  const std::uint64_t shards = emission_shard_count(config);
  std::vector<std::vector<double>> per_shard(shards);

  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::min<std::uint64_t>(shards, 64)));
  if (threads == 1) {
    for (std::uint64_t k = 0; k < shards; ++k) per_shard[k] = shard_times(config, k, shards);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        for (std::uint64_t k = w; k < shards; k += threads) {
          per_shard[k] = shard_times(config, k, shards);
        }
      });
    }
  }

  std::size_t total = 0;
  for (const auto& s : per_shard) total += s.size();
  std::vector<WavePacketPair> pairs;
  pairs.reserve(total);
  for (const auto& s : per_shard) {
    for (double t : s) {
      pairs.push_back({pairs.size(), t, config.blue, config.green});
    }
  }
  return pairs;
}

double overlap_window(double alpha, double packet_support) {
  return 4.0 * alpha + 2.0 * packet_support;
}

double expected_overlap_probability(double emission_rate, double alpha, double packet_support) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (emission_rate < 0.0) throw std::invalid_argument("emission rate must be >= 0");
  return -std::expm1(-emission_rate * overlap_window(alpha, packet_support));
}

double expected_overlap_probability(const SourceConfig& config, double alpha) {
  return expected_overlap_probability(config.emission_rate, alpha, config.packet_support());
}

}  // namespace anticorr
