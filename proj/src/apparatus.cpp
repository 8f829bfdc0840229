#include "anticorr/apparatus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "anticorr/error.hpp"

namespace anticorr {
namespace {

constexpr std::size_t kCopenhagenChunk = 4096;
const double kBelowOne = std::nextafter(1.0, 0.0);

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

RunMetadata base_metadata(std::span<const WavePacketPair> pairs, PhysicsModel model,
                          std::uint64_t seed) {
  RunMetadata m;
  m.model = std::string(to_string(model));
  m.seed = seed;
  if (!pairs.empty()) {
    m.packet_support = std::max(pairs.front().blue.support(), pairs.front().green.support());
  }
  return m;
}

// Detector lane for the wave model: one bank, every packet in emission order.
std::vector<double> planck_lane(std::span<const WavePacketPair> pairs, const ApparatusConfig& config,
                                Channel channel, AbsorberBank& bank) {
  const auto c = static_cast<std::size_t>(channel);
  const double share = config.intensity_share(channel);
  const double shift = config.path_delays[c] + config.signal_latency;
  std::vector<double> times;
  std::vector<double> offsets;
  for (const auto& pair : pairs) {
    const EnvelopeSpec& packet = channel == Channel::d0 ? pair.blue : pair.green;
    offsets.clear();
    bank.absorb(packet, share, offsets);
    for (double offset : offsets) times.push_back(pair.emission_time + shift + offset);
  }
  return times;
}

}  // namespace

std::string_view to_string(PhysicsModel model) {
  return model == PhysicsModel::planck ? "planck" : "copenhagen";
}

PhysicsModel parse_physics_model(std::string_view name) {
  if (name == "copenhagen") return PhysicsModel::copenhagen;
  if (name == "planck") return PhysicsModel::planck;
  throw std::invalid_argument("unknown physics model '" + std::string(name) + "'");
}

double ApparatusConfig::intensity_share(Channel c) const {
  switch (c) {
    case Channel::d0:
      return efficiencies[0];
    case Channel::d1:
      return efficiencies[1] * transmittance;
    case Channel::d2:
      return efficiencies[2] * reflectance();
  }
  return 0.0;
}

void ApparatusConfig::validate() const {
  if (!is_probability(transmittance)) {
    throw ConfigError("apparatus.transmittance", "must lie in [0, 1]");
  }
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    const std::string idx = "[" + std::to_string(i) + "]";
    if (!is_probability(efficiencies[i])) {
      throw ConfigError("apparatus.efficiencies" + idx, "must lie in [0, 1]");
    }
    if (!(path_delays[i] >= 0.0) || !std::isfinite(path_delays[i])) {
      throw ConfigError("apparatus.path_delays" + idx, "must be finite and >= 0");
    }
    if (!(dead_times[i] >= 0.0) || !std::isfinite(dead_times[i])) {
      throw ConfigError("apparatus.dead_times" + idx, "must be finite and >= 0");
    }
  }
  if (!(signal_latency >= 0.0) || !std::isfinite(signal_latency)) {
    throw ConfigError("apparatus.signal_latency", "must be finite and >= 0");
  }
}

void PlanckConfig::validate() const {
  if (absorbers == 0) throw ConfigError("planck.absorbers", "must be >= 1");
  if (!(fill_gain >= 0.0) || !std::isfinite(fill_gain)) {
    throw ConfigError("planck.fill_gain", "must be finite and >= 0");
  }
}

AbsorberBank::AbsorberBank(const PlanckConfig& config, Engine engine)
    : fill_gain_(config.fill_gain), engine_(std::move(engine)) {
  config.validate();
  levels_.resize(config.absorbers);
  for (double& level : levels_) level = uniform01(engine_);
}

double AbsorberBank::fill_per_absorber(const EnvelopeSpec& packet, double share) const {
  return fill_gain_ * share * packet.energy() / static_cast<double>(levels_.size());
}

std::size_t AbsorberBank::absorb(const EnvelopeSpec& packet, double share,
                                 std::vector<double>& signal_offsets) {
  const double delta = fill_per_absorber(packet, share);
  if (!(delta > 0.0)) return 0;
  fill_added_ += delta * static_cast<double>(levels_.size());

  std::size_t fired = 0;
  for (double& level : levels_) {
    double remaining = delta;
    double consumed = 0.0;
    while (1.0 - level <= remaining) {
      const double need = 1.0 - level;
      consumed += need;
      remaining -= need;
      signal_offsets.push_back(packet.quantile(consumed / delta));
      ++fired;
      level = uniform01(engine_);
    }
    level = std::min(level + remaining, kBelowOne);
  }
  return fired;
}

std::array<AbsorberBank, kChannelCount> make_absorber_banks(const PlanckConfig& planck,
                                                            std::uint64_t seed) {
  return {AbsorberBank(planck, make_engine(seed, RngStream::absorbers, 0)),
          AbsorberBank(planck, make_engine(seed, RngStream::absorbers, 1)),
          AbsorberBank(planck, make_engine(seed, RngStream::absorbers, 2))};
}

EventStreams detect_copenhagen(std::span<const WavePacketPair> pairs, const ApparatusConfig& config,
                               std::uint64_t seed) {
  config.validate();
  std::array<std::vector<double>, kChannelCount> raw;
  for (auto& r : raw) r.reserve(pairs.size());

  for (std::size_t begin = 0; begin < pairs.size(); begin += kCopenhagenChunk) {
    auto engine = make_engine(seed, RngStream::copenhagen, begin / kCopenhagenChunk);
    const std::size_t end = std::min(pairs.size(), begin + kCopenhagenChunk);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& pair = pairs[i];
      if (uniform01(engine) < config.efficiencies[0]) {
        raw[0].push_back(pair.emission_time + config.path_delays[0] +
                         pair.blue.quantile(uniform01(engine)));
      }
      const std::size_t arm = uniform01(engine) < config.transmittance ? 1 : 2;
      if (uniform01(engine) < config.efficiencies[arm]) {
        raw[arm].push_back(pair.emission_time + config.path_delays[arm] +
                           pair.green.quantile(uniform01(engine)));
      }
    }
  }
  return finalize_detections(std::move(raw), config.dead_times,
                             base_metadata(pairs, PhysicsModel::copenhagen, seed));
}

EventStreams detect_planck(std::span<const WavePacketPair> pairs, const ApparatusConfig& config,
                           std::array<AbsorberBank, kChannelCount> banks, bool parallel) {
  config.validate();
  std::array<std::vector<double>, kChannelCount> raw;
  if (parallel) {
    std::array<std::jthread, kChannelCount> lanes;
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      lanes[c] = std::jthread([&, c] {
        raw[c] = planck_lane(pairs, config, static_cast<Channel>(c), banks[c]);
      });
    }
  } else {
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      raw[c] = planck_lane(pairs, config, static_cast<Channel>(c), banks[c]);
    }
  }
  return finalize_detections(std::move(raw), config.dead_times,
                             base_metadata(pairs, PhysicsModel::planck, 0));
}

EventStreams detect_planck(std::span<const WavePacketPair> pairs, const ApparatusConfig& config,
                           const PlanckConfig& planck, std::uint64_t seed, bool parallel) {
  auto streams = detect_planck(pairs, config, make_absorber_banks(planck, seed), parallel);
  auto metadata = streams.metadata();
  metadata.seed = seed;
  streams.set_metadata(std::move(metadata));
  return streams;
}

std::vector<double> apply_dead_time(std::span<const double> times, double dead_time) {
  if (!(dead_time >= 0.0)) throw std::invalid_argument("dead time must be >= 0");
  if (!std::is_sorted(times.begin(), times.end())) {
    throw std::invalid_argument("dead time requires a sorted channel");
  }
  std::vector<double> kept;
  kept.reserve(times.size());
  for (double t : times) {
    if (kept.empty() || !(t - kept.back() < dead_time)) kept.push_back(t);
  }
  return kept;
}

EventStreams apply_dead_time(const EventStreams& streams,
                             const std::array<double, kChannelCount>& dead_times) {
  EventStreams::Channels channels;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    channels[c] = apply_dead_time(streams.channels()[c], dead_times[c]);
  }
  return EventStreams(std::move(channels), streams.metadata());
}

EventStreams apply_dead_time(const EventStreams& streams, double dead_time) {
  return apply_dead_time(streams, {dead_time, dead_time, dead_time});
}

EventStreams finalize_detections(std::array<std::vector<double>, kChannelCount> raw,
                                 const std::array<double, kChannelCount>& dead_times,
                                 RunMetadata metadata) {
  std::uint64_t ties = 0;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    std::sort(raw[c].begin(), raw[c].end());
    if (dead_times[c] > 0.0) raw[c] = apply_dead_time(raw[c], dead_times[c]);
    ties += sort_and_break_ties(raw[c]);
  }
  metadata.tie_breaks = ties;
  EventStreams streams(std::move(raw), std::move(metadata));
  auto m = streams.metadata();
  m.time_resolution = time_resolution_at(streams.max_timestamp());
  streams.set_metadata(std::move(m));
  return streams;
}

}  // namespace anticorr
