#include "anticorr/timetag.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>

namespace anticorr {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'C', 'T', 'A', 'G'};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  return v;
}

// Visits events in (timestamp, channel) order.
template <class Visitor>
void for_each_in_time_order(const EventStreams& streams, Visitor&& visit) {
  std::array<std::size_t, kChannelCount> next{};
  const auto& channels = streams.channels();
  for (;;) {
    std::size_t best = kChannelCount;
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      if (next[c] == channels[c].size()) continue;
      if (best == kChannelCount || channels[c][next[c]] < channels[best][next[best]]) best = c;
    }
    if (best == kChannelCount) return;
    visit(DetectionEvent{static_cast<Channel>(best), channels[best][next[best]]});
    ++next[best];
  }
}

}  // namespace

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::d0:
      return "D0";
    case Channel::d1:
      return "D1";
    case Channel::d2:
      return "D2";
  }
  return "D?";
}

std::string_view to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::bad_magic:
      return "bad magic";
    case FormatErrorKind::unsupported_version:
      return "unsupported version";
    case FormatErrorKind::truncated:
      return "truncated";
    case FormatErrorKind::ordering:
      return "ordering violation";
    case FormatErrorKind::bad_channel:
      return "bad channel";
    case FormatErrorKind::bad_timestamp:
      return "bad timestamp";
    case FormatErrorKind::bad_metadata:
      return "bad metadata";
    case FormatErrorKind::io:
      return "i/o failure";
  }
  return "unknown";
}

nlohmann::json to_json(const RunMetadata& m) {
  nlohmann::json j;
  j["model"] = m.model;
  j["seed"] = m.seed;
  j["run_duration"] = m.run_duration;
  j["time_resolution"] = m.time_resolution;
  j["tie_breaks"] = m.tie_breaks;
  if (m.emission_rate) j["emission_rate"] = *m.emission_rate;
  if (m.packet_support) j["packet_support"] = *m.packet_support;
  if (m.alpha) j["alpha"] = *m.alpha;
  j["config"] = m.config;
  return j;
}

RunMetadata metadata_from_json(const nlohmann::json& j) {
  RunMetadata m;
  m.model = j.value("model", std::string{});
  m.seed = j.value("seed", std::uint64_t{0});
  m.run_duration = j.value("run_duration", 0.0);
  m.time_resolution = j.value("time_resolution", 0.0);
  m.tie_breaks = j.value("tie_breaks", std::uint64_t{0});
  if (j.contains("emission_rate")) m.emission_rate = j.at("emission_rate").get<double>();
  if (j.contains("packet_support")) m.packet_support = j.at("packet_support").get<double>();
  if (j.contains("alpha")) m.alpha = j.at("alpha").get<double>();
  m.config = j.value("config", nlohmann::json::object());
  return m;
}

EventStreams::EventStreams(Channels channels, RunMetadata metadata)
    : channels_(std::move(channels)), metadata_(std::move(metadata)) {
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const auto& times = channels_[c];
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!std::isfinite(times[i]) || times[i] < 0.0) {
        throw std::invalid_argument("channel " + std::string(to_string(static_cast<Channel>(c))) +
                                    ": timestamps must be finite and nonnegative");
      }
      if (i > 0 && !(times[i - 1] < times[i])) {
        throw std::invalid_argument("channel " + std::string(to_string(static_cast<Channel>(c))) +
                                    ": timestamps must be strictly increasing");
      }
    }
  }
}

std::size_t EventStreams::size() const {
  std::size_t n = 0;
  for (const auto& c : channels_) n += c.size();
  return n;
}

std::vector<DetectionEvent> EventStreams::merged() const {
  std::vector<DetectionEvent> events;
  events.reserve(size());
  for_each_in_time_order(*this, [&](const DetectionEvent& e) { events.push_back(e); });
  return events;
}

double EventStreams::max_timestamp() const {
  double t = 0.0;
  for (const auto& c : channels_) {
    if (!c.empty()) t = std::max(t, c.back());
  }
  return t;
}

std::uint64_t sort_and_break_ties(std::vector<double>& times) {
  std::sort(times.begin(), times.end());
  std::uint64_t nudged = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i - 1] < times[i])) {
      times[i] = std::nextafter(times[i - 1], std::numeric_limits<double>::infinity());
      ++nudged;
    }
  }
  return nudged;
}

double time_resolution_at(double t) {
  t = std::abs(t);
  return std::nextafter(t, std::numeric_limits<double>::infinity()) - t;
}

std::vector<std::uint8_t> encode_stream(const EventStreams& streams) {
  const std::string metadata = to_json(streams.metadata()).dump();
  if (metadata.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError(FormatErrorKind::bad_metadata, "metadata exceeds 4 GiB");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kCtagHeaderSize + metadata.size() + kCtagRecordSize * streams.size());
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_u16(out, kCtagVersion);
  out.push_back(static_cast<std::uint8_t>(kChannelCount));
  put_u32(out, static_cast<std::uint32_t>(metadata.size()));
  out.insert(out.end(), metadata.begin(), metadata.end());
  for_each_in_time_order(streams, [&](const DetectionEvent& e) {
    out.push_back(static_cast<std::uint8_t>(e.channel));
    put_f64(out, e.timestamp);
  });
  return out;
}

EventStreams decode_stream(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size()) {
    throw FormatError(FormatErrorKind::truncated, "shorter than the magic number");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError(FormatErrorKind::bad_magic, "expected \"CTAG\"");
  }
  if (bytes.size() < kCtagHeaderSize) {
    throw FormatError(FormatErrorKind::truncated, "incomplete header");
  }
  const auto version = static_cast<std::uint16_t>(get_le(bytes, 4, 2));
  if (version != kCtagVersion) {
    throw FormatError(FormatErrorKind::unsupported_version,
                      "version " + std::to_string(version) + ", expected " +
                          std::to_string(kCtagVersion));
  }
  const std::size_t channel_count = bytes[6];
  if (channel_count != kChannelCount) {
    throw FormatError(FormatErrorKind::bad_channel,
                      "channel count " + std::to_string(channel_count) + ", expected 3");
  }
  const std::size_t metadata_size = get_le(bytes, 7, 4);
  if (bytes.size() - kCtagHeaderSize < metadata_size) {
    throw FormatError(FormatErrorKind::truncated, "metadata runs past end of data");
  }

  RunMetadata metadata;
  try {
    const auto* begin = reinterpret_cast<const char*>(bytes.data() + kCtagHeaderSize);
    metadata = metadata_from_json(nlohmann::json::parse(begin, begin + metadata_size));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatErrorKind::bad_metadata, e.what());
  }

  const auto body = bytes.subspan(kCtagHeaderSize + metadata_size);
  if (body.size() % kCtagRecordSize != 0) {
    throw FormatError(FormatErrorKind::truncated,
                      "body ends inside a record (" + std::to_string(body.size()) + " bytes)");
  }

  EventStreams::Channels channels;
  DetectionEvent previous{Channel::d0, -1.0};
  const std::size_t records = body.size() / kCtagRecordSize;
  for (std::size_t r = 0; r < records; ++r) {
    const std::size_t offset = r * kCtagRecordSize;
    const std::uint8_t c = body[offset];
    if (c >= kChannelCount) {
      throw FormatError(FormatErrorKind::bad_channel,
                        "record " + std::to_string(r) + " has channel " + std::to_string(c));
    }
    const double t = std::bit_cast<double>(get_le(body, offset + 1, 8));
    if (!std::isfinite(t) || t < 0.0) {
      throw FormatError(FormatErrorKind::bad_timestamp, "record " + std::to_string(r));
    }
    const DetectionEvent event{static_cast<Channel>(c), t};
    if (t < previous.timestamp ||
        (t == previous.timestamp && event.channel <= previous.channel)) {
      throw FormatError(FormatErrorKind::ordering,
                        "record " + std::to_string(r) + " is out of (timestamp, channel) order");
    }
    channels[c].push_back(t);
    previous = event;
  }
  return EventStreams(std::move(channels), std::move(metadata));
}

void write_stream(const EventStreams& streams, std::ostream& out) {
  const auto bytes = encode_stream(streams);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatErrorKind::io, "write failed");
}

EventStreams read_stream(std::istream& in) {
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>()};
  if (in.bad()) throw FormatError(FormatErrorKind::io, "read failed");
  return decode_stream(bytes);
}

void write_csv(const EventStreams& streams, std::ostream& out) {
  out << "channel,timestamp\n";
  char buffer[64];
  for_each_in_time_order(streams, [&](const DetectionEvent& e) {
    std::snprintf(buffer, sizeof buffer, "%.17g", e.timestamp);
    out << to_string(e.channel) << ',' << buffer << '\n';
  });
  if (!out) throw FormatError(FormatErrorKind::io, "csv write failed");
}

}  // namespace anticorr
