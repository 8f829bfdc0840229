#pragma once

#include <stdexcept>
#include <string>

namespace anticorr {

/// Raised when a configuration value violates its documented range.
/// `field()` carries the dotted path of the offending entry, e.g.
/// "source.emission_rate".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace anticorr
