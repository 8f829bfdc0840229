#include "anticorr/poisson_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "anticorr/random.hpp"

namespace anticorr {

double expected_dot_count(const EnvelopeSpec& packet, const PlanckConfig& bank) {
  const double n = static_cast<double>(bank.absorbers);
  return bank.fill_gain * (packet.energy() / n) * n;
}

PoissonDiagnostic run_poisson_diagnostic(const EnvelopeSpec& packet, const PlanckConfig& bank,
                                         std::uint64_t replications, std::uint64_t seed) {
  packet.validate();
  bank.validate();
  if (replications < kMinPoissonReplications) {
    throw std::invalid_argument("insufficient replications: need at least " +
                                std::to_string(kMinPoissonReplications));
  }

  PoissonDiagnostic d;
  d.lambda = expected_dot_count(packet, bank);
  d.replications = replications;
  d.absorbers = bank.absorbers;

  std::vector<double> offsets;
  double total = 0.0;
  for (std::uint64_t r = 0; r < replications; ++r) {
    AbsorberBank fresh(bank, make_engine(seed, RngStream::poisson_diagnostic, r));
    offsets.clear();
    const std::size_t dots = fresh.absorb(packet, 1.0, offsets);
    if (d.histogram.size() <= dots) d.histogram.resize(dots + 1, 0);
    ++d.histogram[dots];
    total += static_cast<double>(dots);
  }
  d.mean_dots = total / static_cast<double>(replications);

  // Bins 0..K where K covers every observed count and the bulk of the law.
  const auto top = std::max<std::size_t>(
      d.histogram.size(), static_cast<std::size_t>(std::ceil(d.lambda + 10.0 * std::sqrt(d.lambda))) + 1);
  d.histogram.resize(top, 0);
  d.probabilities.resize(top);
  double cumulative = 0.0;
  for (std::size_t n = 0; n + 1 < top; ++n) {
    d.probabilities[n] = stats::poisson_pmf(n, d.lambda);
    cumulative += d.probabilities[n];
  }
  d.probabilities[top - 1] = std::max(0.0, 1.0 - cumulative);

  d.degenerate = d.lambda == 0.0 || total == 0.0;
  d.fit = stats::chi_square_test(d.histogram, d.probabilities);
  if (d.degenerate && d.fit.degrees_of_freedom <= 0) d.fit.p_value = 1.0;
  return d;
}

nlohmann::json to_json(const PoissonDiagnostic& d) {
  return {{"lambda", d.lambda},
          {"replications", d.replications},
          {"absorbers", d.absorbers},
          {"mean_dots", d.mean_dots},
          {"histogram", d.histogram},
          {"poisson_probabilities", d.probabilities},
          {"chi_square", d.fit.statistic},
          {"degrees_of_freedom", d.fit.degrees_of_freedom},
          {"p_value", d.fit.p_value},
          {"degenerate", d.degenerate}};
}

}  // namespace anticorr
