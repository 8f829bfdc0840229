#pragma once

#include <string_view>

namespace anticorr {

enum class EnvelopeShape { rectangular, gaussian };

std::string_view to_string(EnvelopeShape shape);
/// Throws std::invalid_argument for anything but "rectangular" or "gaussian".
EnvelopeShape parse_envelope_shape(std::string_view name);

/// Gaussian packets are truncated at this many standard deviations.
inline constexpr double kGaussianCutoff = 4.0;

/// Temporal intensity profile of one wave packet.
///
/// Offsets are measured from the packet start, so the profile lives on
/// [0, support()]. A Gaussian is centred at kGaussianCutoff * sigma and cut
/// at +/- kGaussianCutoff * sigma; a rectangular packet is flat over its
/// duration. Intensity is amplitude^2 times the unit-height shape.
struct EnvelopeSpec {
  EnvelopeShape shape = EnvelopeShape::gaussian;
  double width = 1e-9;  // rectangular: duration; gaussian: sigma (seconds)
  double amplitude = 1.0;

  /// Throws ConfigError naming `field` when width or amplitude is not > 0.
  void validate(std::string_view field = "envelope") const;

  double support() const;
  double center() const { return 0.5 * support(); }

  /// Unit-height shape integral over the support.
  double normalization() const;
  /// Integrated intensity: amplitude^2 * normalization().
  double energy() const { return amplitude * amplitude * normalization(); }

  double intensity(double offset) const;
  /// Fraction of the packet energy delivered before `offset`, in [0, 1].
  double cumulative_fraction(double offset) const;
  /// Inverse of cumulative_fraction; `fraction` is clamped to [0, 1].
  double quantile(double fraction) const;
  /// Variance of the normalized intensity profile.
  double profile_variance() const;

  bool operator==(const EnvelopeSpec&) const = default;
};

}  // namespace anticorr
