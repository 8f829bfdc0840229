#pragma once

#include <cstdint>
#include <vector>

#include "anticorr/envelope.hpp"

namespace anticorr {

/// One cascade emission: a blue and a green packet leaving together.
struct WavePacketPair {
  std::uint64_t pair_id = 0;
  double emission_time = 0.0;
  EnvelopeSpec blue;
  EnvelopeSpec green;

  bool operator==(const WavePacketPair&) const = default;
};

struct SourceConfig {
  double emission_rate = 1e3;  // emissions per second
  double run_duration = 1.0;   // seconds
  std::uint64_t seed = 0;
  EnvelopeSpec blue;
  EnvelopeSpec green;

  /// Throws ConfigError on a non-positive rate or duration, or a bad envelope.
  void validate() const;
  /// Longest support among the two packets.
  double packet_support() const;
};

/// Number of time shards a run is cut into. Depends on the configuration
/// only, never on the thread count, so the output is thread-invariant.
std::uint64_t emission_shard_count(const SourceConfig& config);

/// Homogeneous Poisson emission times on [0, run_duration), sorted, with
/// consecutive pair ids. Shards are generated independently from
/// (seed, shard index) and may be spread over `threads` workers.
std::vector<WavePacketPair> generate_emissions(const SourceConfig& config,
                                               unsigned threads = 1);

/// Probability that some other emission lands within +/- window/2 of a
/// given one, where window = 4 * alpha + 2 * packet_support. Throws
/// std::invalid_argument unless alpha > 0.
double expected_overlap_probability(double emission_rate, double alpha,
                                    double packet_support);
double expected_overlap_probability(const SourceConfig& config, double alpha);

/// The window length used by expected_overlap_probability.
double overlap_window(double alpha, double packet_support);

}  // namespace anticorr
