#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "anticorr/envelope.hpp"
#include "anticorr/random.hpp"
#include "anticorr/source.hpp"
#include "anticorr/timetag.hpp"

namespace anticorr {

enum class PhysicsModel { copenhagen, planck };

std::string_view to_string(PhysicsModel model);
PhysicsModel parse_physics_model(std::string_view name);

/// Filters, mirror and detectors. Index 0 is the blue trigger D0, indices
/// 1 and 2 are the transmitted and reflected green arms.
struct ApparatusConfig {
  double transmittance = 0.5;  // fraction of the green packet sent to D1
  std::array<double, kChannelCount> path_delays{0.0, 0.0, 0.0};
  std::array<double, kChannelCount> efficiencies{1.0, 1.0, 1.0};
  std::array<double, kChannelCount> dead_times{0.0, 0.0, 0.0};
  double signal_latency = 0.0;  // saturation-to-signal delay, Planck only
  PhysicsModel model = PhysicsModel::copenhagen;

  double reflectance() const { return 1.0 - transmittance; }
  /// Share of a packet's intensity reaching detector `c` (efficiency included).
  double intensity_share(Channel c) const;
  void validate() const;
};

/// Absorber-bank parameters for one detector.
struct PlanckConfig {
  std::size_t absorbers = 64;
  double fill_gain = 4e8;  // fill units per (intensity * second)

  void validate() const;
};

/// Microscopic absorbers of one detector. Every absorber meets an equal
/// share of the incident packet and fills at fill_gain times its intensity;
/// on reaching 1 it signals and restarts from a fresh uniform level.
class AbsorberBank {
 public:
  /// Fill levels start i.i.d. uniform on [0, 1).
  AbsorberBank(const PlanckConfig& config, Engine engine);

  /// Feeds `share` of `packet` to the bank. Appends the offset (from packet
  /// start) of every signal to `signal_offsets` and returns how many fired.
  std::size_t absorb(const EnvelopeSpec& packet, double share,
                     std::vector<double>& signal_offsets);

  /// Fill each absorber receives from `share` of `packet`.
  double fill_per_absorber(const EnvelopeSpec& packet, double share) const;

  std::span<const double> fill_levels() const { return levels_; }
  std::size_t size() const { return levels_.size(); }
  double fill_gain() const { return fill_gain_; }
  /// Cumulative fill delivered by absorbed packets (resets excluded).
  double total_fill_added() const { return fill_added_; }

 private:
  std::vector<double> levels_;
  double fill_gain_;
  Engine engine_;
  double fill_added_ = 0.0;
};

/// Single-photon routing: each pair yields at most one D0 event and at
/// most one event in {D1, D2}. Timestamps are emission time + path delay +
/// an offset drawn from the packet's normalized intensity profile.
/// Channels are sorted, dead time is applied, and ties are broken.
EventStreams detect_copenhagen(std::span<const WavePacketPair> pairs,
                               const ApparatusConfig& config, std::uint64_t seed);

/// Wave absorption: every detector integrates its share of each packet in
/// emission order through its own bank. Banks run on separate lanes and
/// carry their state across packets.
EventStreams detect_planck(std::span<const WavePacketPair> pairs, const ApparatusConfig& config,
                           std::array<AbsorberBank, kChannelCount> banks, bool parallel = true);

/// Convenience overload: banks built from `planck` and seeded from
/// (seed, detector index).
EventStreams detect_planck(std::span<const WavePacketPair> pairs, const ApparatusConfig& config,
                           const PlanckConfig& planck, std::uint64_t seed, bool parallel = true);

std::array<AbsorberBank, kChannelCount> make_absorber_banks(const PlanckConfig& planck,
                                                            std::uint64_t seed);

/// Drops every event closer than `dead_time` to the last kept one. Input
/// must be nondecreasing; throws std::invalid_argument otherwise.
std::vector<double> apply_dead_time(std::span<const double> times, double dead_time);
EventStreams apply_dead_time(const EventStreams& streams, double dead_time);
EventStreams apply_dead_time(const EventStreams& streams,
                             const std::array<double, kChannelCount>& dead_times);

/// Sorts raw per-channel detections, applies dead time and breaks ties;
/// records tie breaks and time resolution in the returned metadata.
EventStreams finalize_detections(std::array<std::vector<double>, kChannelCount> raw,
                                 const std::array<double, kChannelCount>& dead_times,
                                 RunMetadata metadata);

}  // namespace anticorr
