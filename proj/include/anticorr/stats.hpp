#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace anticorr::stats {

/// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double x) const { return lower <= x && x <= upper; }
  double width() const { return upper - lower; }
  bool operator==(const Interval&) const = default;
};

/// Wilson score interval for `successes` out of `trials` (trials > 0).
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95);

/// Wilson score interval for an observed proportion over an effective
/// (possibly fractional) number of independent trials.
Interval wilson_effective(double proportion, double effective_trials, double z = kZ95);

/// sqrt(p (1 - p) / n).
double binomial_standard_error(double p, std::uint64_t n);

double poisson_pmf(std::uint64_t n, double lambda);

struct GoodnessOfFit {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  /// Observed / expected counts after pooling; the last bin is a tail.
  std::vector<double> observed;
  std::vector<double> expected;
};

/// Pearson chi-square of `observed` counts against `probabilities` (same
/// length; the final entry should already include the upper tail). Adjacent
/// bins are pooled from the right until each expected count reaches
/// `min_expected`. Degrees of freedom = bins - 1 - fitted_parameters.
GoodnessOfFit chi_square_test(std::span<const std::uint64_t> observed,
                              std::span<const double> probabilities,
                              double min_expected = 5.0, int fitted_parameters = 0);

/// Upper tail of the chi-square distribution.
double chi_square_survival(double statistic, int degrees_of_freedom);

struct KolmogorovSmirnov {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample KS test of `sample` against `cdf`; the sample is sorted in
/// place. The p-value uses the asymptotic Kolmogorov distribution with
/// Stephens' small-sample correction.
KolmogorovSmirnov ks_test(std::vector<double>& sample, const std::function<double(double)>& cdf);

/// P(K > x) for the Kolmogorov distribution.
double kolmogorov_survival(double x);

}  // namespace anticorr::stats
