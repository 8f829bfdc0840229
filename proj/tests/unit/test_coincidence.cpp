#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "anticorr/coincidence.hpp"
#include "anticorr/envelope.hpp"

namespace anticorr {
namespace {

EventStreams make(std::vector<double> d0, std::vector<double> d1, std::vector<double> d2) {
  return EventStreams({std::move(d0), std::move(d1), std::move(d2)});
}

std::vector<double> random_channel(std::mt19937_64& rng, std::size_t n, double span) {
  std::uniform_real_distribution<double> u(0.0, span);
  std::vector<double> t(n);
  for (auto& x : t) x = u(rng);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

CoincidenceCounts brute_force(const EventStreams& s, double alpha, double shift) {
  CoincidenceCounts c;
  for (double t0 : s.channel(Channel::d0)) {
    bool h1 = false, h2 = false;
    for (double t : s.channel(Channel::d1)) h1 |= std::abs(t0 + shift - t) <= alpha;
    for (double t : s.channel(Channel::d2)) h2 |= std::abs(t0 - t) <= alpha;
    ++c.triggers;
    c.hits1 += h1;
    c.hits2 += h2;
    c.hits_both += h1 && h2;
  }
  return c;
}

TEST(CountTest, hand_example) {
  const auto s = make({10.0, 20.0, 30.0}, {10.2, 29.0}, {19.8, 30.4});
  EXPECT_EQ(count_coincidences(s, {0.5, 0.0}), (CoincidenceCounts{3, 1, 2, 0}));
  const auto both = make({10.0, 20.0, 30.0}, {10.2, 29.7}, {19.8, 30.4});
  EXPECT_EQ(count_coincidences(both, {0.5, 0.0}), (CoincidenceCounts{3, 2, 2, 1}));
}

TEST(CountTest, window_edges_are_inclusive) {
  const auto s = make({10.0}, {9.5}, {10.5});
  EXPECT_EQ(count_coincidences(s, {0.5, 0.0}), (CoincidenceCounts{1, 1, 1, 1}));
  EXPECT_EQ(count_coincidences(s, {0.49, 0.0}), (CoincidenceCounts{1, 0, 0, 0}));
}

TEST(CountTest, one_event_can_serve_many_triggers) {
  const auto s = make({1.0, 1.1, 1.2}, {1.15}, {});
  EXPECT_EQ(count_coincidences(s, {0.2, 0.0}).hits1, 3u);
}

TEST(CountTest, non_positive_alpha_throws) {
  const auto s = make({1.0}, {}, {});
  EXPECT_THROW(count_coincidences(s, {0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(count_coincidences(s, {-1.0, 0.0}), std::invalid_argument);
}

TEST(CountTest, no_triggers_throws_in_estimate) {
  const auto s = make({}, {1.0}, {2.0});
  EXPECT_THROW(estimate_p(s, {1.0, 0.0}, 0.0), std::invalid_argument);
}

TEST(CountTest, matches_brute_force_on_random_streams) {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const double span = 100.0;
    const auto s = make(random_channel(rng, rng() % 80, span), random_channel(rng, rng() % 80, span),
                        random_channel(rng, rng() % 80, span));
    const double alpha = 0.01 + 3.0 * u(rng);
    const double shift = (u(rng) - 0.5) * 10.0;
    EXPECT_EQ(count_coincidences(s, {alpha, shift}), brute_force(s, alpha, shift));
  }
}

TEST(CountTest, probabilities_are_monotone_in_alpha_and_bounded) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = make(random_channel(rng, 50, 100.0), random_channel(rng, 50, 100.0),
                        random_channel(rng, 50, 100.0));
    CoincidenceCounts previous{};
    for (double alpha : {0.01, 0.1, 0.3, 1.0, 3.0, 10.0}) {
      const auto c = count_coincidences(s, {alpha, 0.0});
      EXPECT_GE(c.hits1, previous.hits1);
      EXPECT_GE(c.hits2, previous.hits2);
      EXPECT_GE(c.hits_both, previous.hits_both);
      EXPECT_LE(c.hits_both, std::min(c.hits1, c.hits2));
      previous = c;
    }
  }
}

TEST(ReportTest, estimates_and_standard_errors) {
  const auto r = report_from_counts({1000, 400, 500, 150}, 1e-8, 0.01);
  EXPECT_DOUBLE_EQ(r.p1.value, 0.4);
  EXPECT_DOUBLE_EQ(r.p2.value, 0.5);
  EXPECT_DOUBLE_EQ(r.p3.value, 0.15);
  EXPECT_DOUBLE_EQ(r.product.value, 0.2);
  EXPECT_NEAR(r.p1.standard_error, std::sqrt(0.4 * 0.6 / 1000), 1e-15);

  // Oracle: multinomial over the four cells (11, 10, 01, 00), then the
  // delta method for p3 - p1 p2 with gradient (1 - p2, 1 - p1, 0) wrt
  // the cells (11, 10, 01): d/dq11 = 1 - p2 - p1, d/dq10 = -p2, d/dq01 = -p1.
  const double q11 = 0.15, q10 = 0.25, q01 = 0.35;
  const double g[3] = {1.0 - 0.5 - 0.4, -0.5, -0.4};
  const double q[3] = {q11, q10, q01};
  double var = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double cov = (i == j ? q[i] : 0.0) - q[i] * q[j];
      var += g[i] * g[j] * cov;
    }
  }
  EXPECT_NEAR(r.difference_standard_error, std::sqrt(var / 1000.0), 1e-14);

  // Product: gradient (p2 + p1) on q11, p2 on q10, p1 on q01.
  const double h[3] = {0.9, 0.5, 0.4};
  double pvar = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) pvar += h[i] * h[j] * ((i == j ? q[i] : 0.0) - q[i] * q[j]);
  }
  EXPECT_NEAR(r.product.standard_error, std::sqrt(pvar / 1000.0), 1e-14);
}

TEST(ReportTest, separated_triggers_keep_binomial_errors) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> d0, d1, d2;
  for (int i = 0; i < 2000; ++i) {
    const double t = 10.0 * (i + 1);
    d0.push_back(t);
    if (coin(rng)) d1.push_back(t + 0.1);
    if (coin(rng)) d2.push_back(t - 0.1);
  }
  const auto s = make(d0, d1, d2);
  const auto r = estimate_p(s, {1.0, 0.0}, 0.0);
  const auto plain = report_from_counts(count_coincidences(s, {1.0, 0.0}), 1.0, 0.0);
  EXPECT_NEAR(r.difference_standard_error, plain.difference_standard_error, 1e-15);
  EXPECT_NEAR(r.product.standard_error, plain.product.standard_error, 1e-15);
  EXPECT_EQ(r.p3.effective_trials, 2000.0);
  EXPECT_EQ(r.p1.interval, plain.p1.interval);
}

TEST(ReportTest, overlapping_trigger_windows_inflate_errors) {
  // Every trigger is doubled: same hit outcome, half the information.
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> d0, d1, d2;
  for (int i = 0; i < 2000; ++i) {
    const double t = 10.0 * (i + 1);
    d0.push_back(t);
    d0.push_back(t + 0.01);
    if (coin(rng)) d1.push_back(t + 0.1);
    if (coin(rng)) d2.push_back(t - 0.1);
  }
  const auto s = make(d0, d1, d2);
  const auto r = estimate_p(s, {1.0, 0.0}, 0.0);
  const auto naive = report_from_counts(count_coincidences(s, {1.0, 0.0}), 1.0, 0.0);
  EXPECT_NEAR(r.difference_standard_error / naive.difference_standard_error, std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(r.p1.standard_error / naive.p1.standard_error, std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(r.p1.effective_trials, 2000.0, 1e-6);
  EXPECT_GT(r.p1.interval.width(), naive.p1.interval.width());
}

TEST(VerdictTest, independent_counts_are_planck_consistent) {
  // p1 = p2 = 0.5, p3 = 0.25 exactly, p0 tiny.
  const auto r = report_from_counts({100000, 50000, 50000, 25000}, 1e-8, 1e-4);
  EXPECT_EQ(r.verdict, Verdict::planck_consistent);
}

TEST(VerdictTest, suppressed_coincidences_are_copenhagen_consistent) {
  const auto r = report_from_counts({100000, 50000, 50000, 10}, 1e-8, 1e-4);
  EXPECT_EQ(r.verdict, Verdict::copenhagen_consistent);
}

TEST(VerdictTest, insignificant_run_is_inconclusive) {
  // p0 exceeds p1 p2: the source is too bright to separate the models.
  const auto r = report_from_counts({100000, 10000, 10000, 1000}, 1e-8, 0.02);
  EXPECT_EQ(r.verdict, Verdict::inconclusive);
}

TEST(VerdictTest, in_between_is_inconclusive) {
  // p3 halfway between 0 and p1 p2: neither hypothesis fits.
  const auto r = report_from_counts({100000, 50000, 50000, 12500}, 1e-8, 1e-4);
  EXPECT_EQ(r.verdict, Verdict::inconclusive);
}

TEST(VerdictTest, nan_p0_is_inconclusive) {
  const auto r = report_from_counts({100000, 50000, 50000, 25000}, 1e-8,
                                    std::numeric_limits<double>::quiet_NaN());
  EXPECT_EQ(r.verdict, Verdict::inconclusive);
}

TEST(GuardTest, flags_faint_runs_at_the_floor) {
  const auto at_floor = report_from_counts({10000, 1, 10000, 1}, 1e-8, 0.0);
  EXPECT_TRUE(at_floor.intensity.flagged);
  const auto above = report_from_counts({10000, 2, 10000, 2}, 1e-8, 0.0);
  EXPECT_FALSE(above.intensity.flagged);
  EXPECT_TRUE(low_intensity_guard(above, 1e-3).flagged);
}

TEST(EstimateTest, warnings_for_missing_metadata_and_coarse_alpha) {
  RunMetadata meta;
  meta.time_resolution = 1e-9;
  const EventStreams s({{{1.0, 2.0}, {1.0}, {2.0}}}, meta);
  const auto r = estimate_p(s, {5e-9, 0.0});
  EXPECT_TRUE(std::isnan(r.p0_theoretical));
  EXPECT_EQ(r.warnings.size(), 2u);
}

TEST(EstimateTest, p0_comes_from_metadata) {
  RunMetadata meta;
  meta.emission_rate = 1000.0;
  meta.packet_support = 8e-9;
  const EventStreams s({{{1.0, 2.0}, {1.0}, {2.0}}}, meta);
  const auto r = estimate_p(s, {1e-8, 0.0});
  EXPECT_NEAR(r.p0_theoretical, 1.0 - std::exp(-1000.0 * (4e-8 + 16e-9)), 1e-15);
}

TEST(ShapeScanTest, rejects_streams_with_a_second_arm) {
  const auto s = make({1.0}, {1.0}, {1.5});
  const std::vector<double> shifts{0.0};
  EXPECT_THROW(shape_scan(s, 0.1, shifts), std::invalid_argument);
}

TEST(ShapeScanTest, empty_grid_and_sorted_output) {
  const auto s = make({1.0, 2.0}, {1.3, 2.3}, {});
  EXPECT_TRUE(shape_scan(s, 0.1, std::vector<double>{}).empty());
  const std::vector<double> shifts{0.3, -0.3, 0.0};
  const auto scan = shape_scan(s, 0.05, shifts);
  ASSERT_EQ(scan.size(), 3u);
  EXPECT_EQ(scan[0].shift, -0.3);
  EXPECT_EQ(scan[2].value, 1.0);
  EXPECT_EQ(scan[1].value, 0.0);
  EXPECT_TRUE(shift_grid(1.0, 0.0, 0.1).empty());
  EXPECT_EQ(shift_grid(0.0, 1.0, 0.25).size(), 5u);
}

std::vector<ShapePoint> analytic_scan(const std::function<double(double)>& f, double from, double to,
                                      double step) {
  std::vector<ShapePoint> scan;
  for (double s : shift_grid(from, to, step)) scan.push_back({s, 0, f(s), {}});
  return scan;
}

TEST(ShapeScanTest, gaussian_width_recovered_from_analytic_curve) {
  // Cross-correlation of two packets with a boxcar window: approximately a
  // Gaussian of variance 2 sigma^2 kappa + alpha^2 / 3 where kappa is the
  // truncated variance factor. Build the curve directly from that variance.
  const double sigma = 1.0, alpha = 0.1;
  const double kappa = EnvelopeSpec{EnvelopeShape::gaussian, 1.0, 1.0}.profile_variance();
  const double var = 2.0 * sigma * sigma * kappa + alpha * alpha / 3.0;
  const auto scan = analytic_scan(
      [&](double s) { return 0.01 + 0.3 * std::exp(-s * s / (2 * var)); }, -15.0, 15.0, 0.05);
  EXPECT_NEAR(recover_gaussian_sigma(scan, alpha, sigma), sigma, 0.01);
  EXPECT_NEAR(scan_peak_shift(scan), 0.0, 1e-9);
}

TEST(ShapeScanTest, triangle_half_width_is_duration) {
  const double T = 2.0;
  const auto scan = analytic_scan([&](double s) { return std::max(0.0, 1.0 - std::abs(s) / T); },
                                  -5.0, 5.0, 0.01);
  EXPECT_NEAR(scan_half_max_width(scan), T, 1e-6);
}

}  // namespace
}  // namespace anticorr
