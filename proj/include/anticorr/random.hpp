#pragma once

#include <cstdint>
#include <random>

namespace anticorr {

using Engine = std::mt19937_64;

/// Independent random streams consumed by the simulator. Each stream is
/// keyed separately so that adding draws to one never perturbs another.
enum class RngStream : std::uint64_t {
  emissions = 1,
  copenhagen = 2,
  absorbers = 3,
  poisson_diagnostic = 4,
};

/// Builds an engine for (seed, stream, index). The mapping goes through
/// std::seed_seq, whose algorithm is fixed by the standard, so sequences
/// are identical across platforms and thread counts.
Engine make_engine(std::uint64_t seed, RngStream stream, std::uint64_t index = 0);

/// Uniform double on [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Uniform double on (0, 1).
inline double uniform_open(Engine& engine) {
  return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace anticorr
