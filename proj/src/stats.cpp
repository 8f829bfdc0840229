#include "anticorr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace anticorr::stats {

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) throw std::invalid_argument("wilson interval needs at least one trial");
  return wilson_effective(static_cast<double>(successes) / static_cast<double>(trials),
                         static_cast<double>(trials), z);
}

Interval wilson_effective(double p, double n, double z) {
  if (!(n > 0.0)) throw std::invalid_argument("wilson interval needs at least one trial");
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {p == 0.0 ? 0.0 : std::max(0.0, centre - half), p == 1.0 ? 1.0 : std::min(1.0, centre + half)};
}

double binomial_standard_error(double p, std::uint64_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

double poisson_pmf(std::uint64_t n, double lambda) {
  if (lambda == 0.0) return n == 0 ? 1.0 : 0.0;
  const double k = static_cast<double>(n);
  return std::exp(k * std::log(lambda) - lambda - std::lgamma(k + 1.0));
}

double chi_square_survival(double statistic, int degrees_of_freedom) {
  if (degrees_of_freedom <= 0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * degrees_of_freedom, 0.5 * statistic);
}

GoodnessOfFit chi_square_test(std::span<const std::uint64_t> observed,
                              std::span<const double> probabilities, double min_expected,
                              int fitted_parameters) {
  if (observed.size() != probabilities.size() || observed.empty()) {
    throw std::invalid_argument("chi-square needs matching, nonempty bins");
  }
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);

  GoodnessOfFit fit;
  // Pool from the right so the tail bin absorbs sparse high counts.
  double obs = 0.0;
  double exp = 0.0;
  for (std::size_t i = observed.size(); i-- > 0;) {
    obs += static_cast<double>(observed[i]);
    exp += probabilities[i] * total;
    if (exp >= min_expected || i == 0) {
      fit.observed.push_back(obs);
      fit.expected.push_back(exp);
      obs = exp = 0.0;
    }
  }
  std::reverse(fit.observed.begin(), fit.observed.end());
  std::reverse(fit.expected.begin(), fit.expected.end());
  // A sparse leftmost bin gets merged into its right neighbour.
  if (fit.expected.size() > 1 && fit.expected.front() < min_expected) {
    fit.observed[1] += fit.observed[0];
    fit.expected[1] += fit.expected[0];
    fit.observed.erase(fit.observed.begin());
    fit.expected.erase(fit.expected.begin());
  }

  for (std::size_t i = 0; i < fit.observed.size(); ++i) {
    if (fit.expected[i] > 0.0) {
      const double d = fit.observed[i] - fit.expected[i];
      fit.statistic += d * d / fit.expected[i];
    }
  }
  fit.degrees_of_freedom = static_cast<int>(fit.observed.size()) - 1 - fitted_parameters;
  fit.p_value = chi_square_survival(fit.statistic, fit.degrees_of_freedom);
  return fit;
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KolmogorovSmirnov ks_test(std::vector<double>& sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks test needs a nonempty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double root_n = std::sqrt(n);
  return {d, kolmogorov_survival((root_n + 0.12 + 0.11 / root_n) * d)};
}

}  // namespace anticorr::stats
