#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace anticorr {

enum class Channel : std::uint8_t { d0 = 0, d1 = 1, d2 = 2 };
inline constexpr std::size_t kChannelCount = 3;

std::string_view to_string(Channel channel);

struct DetectionEvent {
  Channel channel = Channel::d0;
  double timestamp = 0.0;

  bool operator==(const DetectionEvent&) const = default;
};

/// Run description carried alongside the time tags. The typed fields are
/// what analysis needs; `config` holds the complete run configuration and
/// is opaque to this layer.
struct RunMetadata {
  std::string model;
  std::uint64_t seed = 0;
  double run_duration = 0.0;
  /// Spacing of representable timestamps near the largest one.
  double time_resolution = 0.0;
  /// Number of timestamps nudged upward to keep channels strictly sorted.
  std::uint64_t tie_breaks = 0;
  std::optional<double> emission_rate;
  std::optional<double> packet_support;
  std::optional<double> alpha;
  nlohmann::json config = nlohmann::json::object();

  bool operator==(const RunMetadata&) const = default;
};

nlohmann::json to_json(const RunMetadata& metadata);
RunMetadata metadata_from_json(const nlohmann::json& j);

/// Three per-channel timestamp arrays plus run metadata. Each channel is
/// strictly increasing and every timestamp is finite and nonnegative; the
/// constructor enforces this.
class EventStreams {
 public:
  using Channels = std::array<std::vector<double>, kChannelCount>;

  EventStreams() = default;
  /// Throws std::invalid_argument when an invariant does not hold.
  explicit EventStreams(Channels channels, RunMetadata metadata = {});

  std::span<const double> channel(Channel c) const {
    return channels_[static_cast<std::size_t>(c)];
  }
  const Channels& channels() const { return channels_; }
  const RunMetadata& metadata() const { return metadata_; }
  void set_metadata(RunMetadata metadata) { metadata_ = std::move(metadata); }

  std::size_t size() const;
  /// All events ordered by (timestamp, channel).
  std::vector<DetectionEvent> merged() const;
  /// Largest timestamp over all channels, 0 when empty.
  double max_timestamp() const;

  bool operator==(const EventStreams&) const = default;

 private:
  Channels channels_;
  RunMetadata metadata_;
};

/// Sorts `times` and nudges repeated values up by one ulp so the result is
/// strictly increasing. Returns the number of nudged entries.
std::uint64_t sort_and_break_ties(std::vector<double>& times);

/// Distance to the next representable double above `t` (>= 0).
double time_resolution_at(double t);

// ---------------------------------------------------------------------------
// CTAG binary format
//
//   "CTAG"              4 bytes
//   version             u16 little endian (kCtagVersion)
//   channel count       u8
//   metadata length     u32 little endian
//   metadata            UTF-8 JSON
//   records             (channel u8, timestamp f64 little endian) repeated,
//                       in (timestamp, channel) order, until end of data
// ---------------------------------------------------------------------------

inline constexpr std::uint16_t kCtagVersion = 1;
inline constexpr std::size_t kCtagHeaderSize = 4 + 2 + 1 + 4;
inline constexpr std::size_t kCtagRecordSize = 1 + 8;

enum class FormatErrorKind {
  bad_magic,
  unsupported_version,
  truncated,
  ordering,
  bad_channel,
  bad_timestamp,
  bad_metadata,
  io,
};

std::string_view to_string(FormatErrorKind kind);

class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}
  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

std::vector<std::uint8_t> encode_stream(const EventStreams& streams);
EventStreams decode_stream(std::span<const std::uint8_t> bytes);

/// Writes CTAG bytes to `out`; throws FormatError(io) when the stream fails.
void write_stream(const EventStreams& streams, std::ostream& out);
/// Reads a complete CTAG document from `in`.
EventStreams read_stream(std::istream& in);

/// Plain-text export: header "channel,timestamp", one row per event in
/// global time order, timestamps with 17 significant digits.
void write_csv(const EventStreams& streams, std::ostream& out);

}  // namespace anticorr
