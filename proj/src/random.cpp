#include "anticorr/random.hpp"

#include <array>

namespace anticorr {

Engine make_engine(std::uint64_t seed, RngStream stream, std::uint64_t index) {
  const auto key = static_cast<std::uint64_t>(stream);
  const std::array<std::uint32_t, 6> words{
      static_cast<std::uint32_t>(seed),  static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(key),   static_cast<std::uint32_t>(key >> 32),
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::seed_seq sequence(words.begin(), words.end());
  return Engine(sequence);
}

}  // namespace anticorr
