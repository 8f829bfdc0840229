#include "anticorr/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "anticorr/error.hpp"

namespace anticorr {
namespace {

// erf(c / sqrt 2): probability mass of a standard normal inside +/- c.
const double kGaussianMass = std::erf(kGaussianCutoff / std::numbers::sqrt2);

}  // namespace

std::string_view to_string(EnvelopeShape shape) {
  switch (shape) {
    case EnvelopeShape::rectangular:
      return "rectangular";
    case EnvelopeShape::gaussian:
      return "gaussian";
  }
  return "unknown";
}

EnvelopeShape parse_envelope_shape(std::string_view name) {
  if (name == "rectangular") return EnvelopeShape::rectangular;
  if (name == "gaussian") return EnvelopeShape::gaussian;
  throw std::invalid_argument("unknown envelope shape '" + std::string(name) + "'");
}

void EnvelopeSpec::validate(std::string_view field) const {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw ConfigError(std::string(field) + ".width", "must be finite and > 0");
  }
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw ConfigError(std::string(field) + ".amplitude", "must be finite and > 0");
  }
}

double EnvelopeSpec::support() const {
  return shape == EnvelopeShape::gaussian ? 2.0 * kGaussianCutoff * width : width;
}

double EnvelopeSpec::normalization() const {
  if (shape == EnvelopeShape::rectangular) return width;
  return width * std::sqrt(2.0 * std::numbers::pi) * kGaussianMass;
}

double EnvelopeSpec::intensity(double offset) const {
  if (offset < 0.0 || offset > support()) return 0.0;
  const double a2 = amplitude * amplitude;
  if (shape == EnvelopeShape::rectangular) return a2;
  const double z = (offset - center()) / width;
  return a2 * std::exp(-0.5 * z * z);
}

double EnvelopeSpec::cumulative_fraction(double offset) const {
  if (offset <= 0.0) return 0.0;
  if (offset >= support()) return 1.0;
  if (shape == EnvelopeShape::rectangular) return offset / width;
  const double z = (offset - center()) / width;
  const double f = 0.5 * (std::erf(z / std::numbers::sqrt2) / kGaussianMass + 1.0);
  return std::clamp(f, 0.0, 1.0);
}

double EnvelopeSpec::quantile(double fraction) const {
  fraction = std::clamp(fraction, 0.0, 1.0);
  if (shape == EnvelopeShape::rectangular) return fraction * width;
  if (fraction == 0.0) return 0.0;
  if (fraction == 1.0) return support();
  const double z =
      std::numbers::sqrt2 * boost::math::erf_inv((2.0 * fraction - 1.0) * kGaussianMass);
  return std::clamp(center() + width * z, 0.0, support());
}

double EnvelopeSpec::profile_variance() const {
  if (shape == EnvelopeShape::rectangular) return width * width / 12.0;
  const double c = kGaussianCutoff;
  const double density = std::exp(-0.5 * c * c) / std::sqrt(2.0 * std::numbers::pi);
  return width * width * (1.0 - 2.0 * c * density / kGaussianMass);
}

}  // namespace anticorr
