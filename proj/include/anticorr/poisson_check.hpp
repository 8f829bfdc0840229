#pragma once

#include <cstdint>
#include <vector>

#include "anticorr/apparatus.hpp"
#include "anticorr/envelope.hpp"
#include "anticorr/stats.hpp"
#include "json.hpp"

namespace anticorr {

/// Minimum replications accepted by run_poisson_diagnostic.
inline constexpr std::uint64_t kMinPoissonReplications = 1000;

/// Absorber count used when none is given. The dot count over a fresh bank
/// is Binomial(n, lambda / n); n must be large for the Poisson limit to
/// survive a 1e5-sample chi-square.
inline constexpr std::size_t kDiagnosticAbsorbers = 4096;

/// Expected dots from one packet on a fresh bank:
/// fill_gain * (integrated intensity at one absorber) * absorber count.
double expected_dot_count(const EnvelopeSpec& packet, const PlanckConfig& bank);

struct PoissonDiagnostic {
  double lambda = 0.0;
  std::uint64_t replications = 0;
  std::size_t absorbers = 0;
  std::vector<std::uint64_t> histogram;  // histogram[n] = replications with n dots
  std::vector<double> probabilities;     // Poisson law, last entry holds the tail
  stats::GoodnessOfFit fit;
  double mean_dots = 0.0;
  /// True when every replication produced zero dots or lambda is zero; the
  /// chi-square then has no degrees of freedom.
  bool degenerate = false;
};

/// Replays `packet` against `replications` fresh banks and compares the
/// dot-count histogram with e^-lambda lambda^n / n!. Throws
/// std::invalid_argument when replications < kMinPoissonReplications.
PoissonDiagnostic run_poisson_diagnostic(const EnvelopeSpec& packet, const PlanckConfig& bank,
                                         std::uint64_t replications, std::uint64_t seed);

nlohmann::json to_json(const PoissonDiagnostic& diagnostic);

}  // namespace anticorr
