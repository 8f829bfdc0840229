#include "anticorr/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "anticorr/envelope.hpp"
#include "anticorr/source.hpp"

namespace anticorr {
namespace {

// Monotone cursor over one arm. Valid while window centres never decrease.
class ArmCursor {
 public:
  explicit ArmCursor(std::span<const double> times) : times_(times) {}

  bool hit(double centre, double alpha) {
    while (next_ < times_.size() && centre - times_[next_] > alpha) ++next_;
    return next_ < times_.size() && std::abs(centre - times_[next_]) <= alpha;
  }

 private:
  std::span<const double> times_;
  std::size_t next_ = 0;
};

// Every trigger its own cluster: S_i S_j reduces to products of indicators,
// and I1 I2 = I1 I3 = I2 I3 = I3.
TriggerClusters singleton_clusters(const CoincidenceCounts& c) {
  const std::array<std::uint64_t, 4> sums{c.triggers, c.hits1, c.hits2, c.hits_both};
  TriggerClusters k;
  k.count = c.triggers;
  for (std::size_t i = 0; i < 4; ++i) {
    k.moments[0][i] = k.moments[i][0] = sums[i];
    k.moments[i][i] = sums[i];
  }
  k.moments[1][2] = k.moments[2][1] = c.hits_both;
  k.moments[1][3] = k.moments[3][1] = c.hits_both;
  k.moments[2][3] = k.moments[3][2] = c.hits_both;
  return k;
}

// Cluster-robust covariance of (p1, p2, p3): sum over clusters of the
// centred sums (S_i - p_i n_c)(S_j - p_j n_c), divided by n^2.
std::array<std::array<double, 3>, 3> estimate_covariance(const TriggerClusters& k,
                                                         const std::array<double, 3>& p, double n) {
  std::array<std::array<double, 3>, 3> cov{};
  const auto m = [&](std::size_t i, std::size_t j) { return static_cast<double>(k.moments[i][j]); };
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      cov[i][j] = (m(i + 1, j + 1) - p[i] * m(0, j + 1) - p[j] * m(i + 1, 0) + p[i] * p[j] * m(0, 0)) /
                  (n * n);
    }
  }
  return cov;
}

double quadratic_form(const std::array<std::array<double, 3>, 3>& cov, const std::array<double, 3>& a) {
  double v = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) v += a[i] * a[j] * cov[i][j];
  }
  return std::max(0.0, v);
}

ProbabilityEstimate make_estimate(std::uint64_t hits, std::uint64_t n, double variance) {
  ProbabilityEstimate e;
  e.hits = hits;
  e.value = static_cast<double>(hits) / static_cast<double>(n);
  const double binomial = stats::binomial_standard_error(e.value, n);
  e.standard_error = std::max(binomial, std::sqrt(variance));
  e.effective_trials = static_cast<double>(n);
  if (e.standard_error > binomial) {
    e.effective_trials = std::min(e.effective_trials, e.value * (1.0 - e.value) / variance);
  }
  e.interval = stats::wilson_effective(e.value, e.effective_trials);
  return e;
}

double scan_baseline(std::span<const ShapePoint> scan) {
  const std::size_t k = std::max<std::size_t>(1, scan.size() / 20);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += scan[i].value + scan[scan.size() - 1 - i].value;
  return sum / static_cast<double>(2 * k);
}

void require_sorted_scan(std::span<const ShapePoint> scan) {
  if (scan.size() < 3) throw std::invalid_argument("scan needs at least three points");
  for (std::size_t i = 1; i < scan.size(); ++i) {
    if (!(scan[i - 1].shift < scan[i].shift)) {
      throw std::invalid_argument("scan shifts must be strictly increasing");
    }
  }
}

}  // namespace

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::copenhagen_consistent:
      return "copenhagen_consistent";
    case Verdict::planck_consistent:
      return "planck_consistent";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

void WindowConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("window alpha must be finite and > 0");
  }
  if (!std::isfinite(shift)) throw std::invalid_argument("window shift must be finite");
}

CoincidenceCounts count_coincidences(const EventStreams& streams, const WindowConfig& window,
                                     TriggerClusters* clusters) {
  window.validate();
  ArmCursor arm1(streams.channel(Channel::d1));
  ArmCursor arm2(streams.channel(Channel::d2));
  CoincidenceCounts counts;
  std::array<std::uint64_t, 4> current{};
  auto flush = [&] {
    if (!clusters || current[0] == 0) return;
    ++clusters->count;
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) clusters->moments[i][j] += current[i] * current[j];
    }
    current = {};
  };
  if (clusters) *clusters = {};
  double previous = 0.0;
  for (double t0 : streams.channel(Channel::d0)) {
    if (counts.triggers > 0 && t0 - previous > 2.0 * window.alpha) flush();
    previous = t0;
    ++counts.triggers;
    const bool h1 = arm1.hit(t0 + window.shift, window.alpha);
    const bool h2 = arm2.hit(t0, window.alpha);
    counts.hits1 += h1;
    counts.hits2 += h2;
    counts.hits_both += h1 && h2;
    current[0] += 1;
    current[1] += h1;
    current[2] += h2;
    current[3] += h1 && h2;
  }
  flush();
  return counts;
}

CoincidenceReport report_from_counts(const CoincidenceCounts& counts, double alpha, double p0,
                                     double intensity_floor, const TriggerClusters* clusters) {
  if (counts.triggers == 0) throw std::invalid_argument("no trigger events");
  const std::uint64_t n = counts.triggers;
  const double nd = static_cast<double>(n);

  const std::array<double, 3> p{static_cast<double>(counts.hits1) / nd,
                                static_cast<double>(counts.hits2) / nd,
                                static_cast<double>(counts.hits_both) / nd};
  const auto cov = estimate_covariance(clusters ? *clusters : singleton_clusters(counts), p, nd);

  CoincidenceReport r;
  r.n0 = n;
  r.alpha_used = alpha;
  r.p0_theoretical = p0;
  r.p1 = make_estimate(counts.hits1, n, cov[0][0]);
  r.p2 = make_estimate(counts.hits2, n, cov[1][1]);
  r.p3 = make_estimate(counts.hits_both, n, cov[2][2]);

  r.product.value = p[0] * p[1];
  r.product.standard_error = std::sqrt(quadratic_form(cov, {p[1], p[0], 0.0}));
  r.product.interval = {std::max(0.0, r.product.value - stats::kZ95 * r.product.standard_error),
                        std::min(1.0, r.product.value + stats::kZ95 * r.product.standard_error)};
  r.difference_standard_error = std::sqrt(quadratic_form(cov, {-p[1], -p[0], 1.0}));

  r.verdict = render_verdict(r, p0);
  r.intensity = low_intensity_guard(r, intensity_floor);
  return r;
}

CoincidenceReport estimate_p(const EventStreams& streams, const WindowConfig& window,
                             std::optional<double> p0, double intensity_floor) {
  TriggerClusters clusters;
  const auto counts = count_coincidences(streams, window, &clusters);
  std::vector<std::string> warnings;

  const auto& meta = streams.metadata();
  if (!p0) {
    if (meta.emission_rate && meta.packet_support) {
      p0 = expected_overlap_probability(*meta.emission_rate, window.alpha, *meta.packet_support);
    } else {
      p0 = std::numeric_limits<double>::quiet_NaN();
      warnings.emplace_back("p0 unknown: stream metadata lacks emission_rate or packet_support");
    }
  }
  if (meta.time_resolution > 0.0 && window.alpha < 10.0 * meta.time_resolution) {
    warnings.emplace_back("alpha is below 10x the stream time resolution");
  }

  auto report = report_from_counts(counts, window.alpha, *p0, intensity_floor, &clusters);
  report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
  if (report.intensity.flagged) report.warnings.push_back(report.intensity.message);
  return report;
}

Verdict render_verdict(const CoincidenceReport& report, double p0) {
  const double product = report.product.value;
  if (!(p0 < product) || report.n0 == 0) return Verdict::inconclusive;

  const double trials =
      report.p3.effective_trials > 0.0 ? report.p3.effective_trials : static_cast<double>(report.n0);
  const auto p3 = stats::wilson_effective(report.p3.value, trials, kVerdictZ);
  const double product_lower = product - kVerdictZ * report.product.standard_error;

  if (p3.contains(product) && p0 < p3.lower) return Verdict::planck_consistent;
  if (p3.upper < product_lower && p3.lower <= p0) return Verdict::copenhagen_consistent;
  return Verdict::inconclusive;
}

IntensityDiagnostic low_intensity_guard(const CoincidenceReport& report, double floor) {
  IntensityDiagnostic d;
  d.floor = floor;
  d.product = report.p1.value * report.p2.value;
  d.flagged = d.product <= floor;
  if (d.flagged) {
    d.message = "p1*p2 is at or below the intensity floor; the run cannot separate the models";
  }
  return d;
}

std::vector<ShapePoint> shape_scan(const EventStreams& streams, double alpha,
                                   std::span<const double> shifts) {
  if (!streams.channel(Channel::d2).empty()) {
    throw std::invalid_argument("shape scan needs the mirror removed (D2 must be empty)");
  }
  const auto d0 = streams.channel(Channel::d0);
  if (d0.empty()) throw std::invalid_argument("no trigger events");

  std::vector<double> sorted(shifts.begin(), shifts.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<ShapePoint> points;
  points.reserve(sorted.size());
  for (double s : sorted) {
    const auto counts = count_coincidences(streams, WindowConfig{alpha, s});
    ShapePoint p;
    p.shift = s;
    p.hits = counts.hits1;
    p.value = static_cast<double>(counts.hits1) / static_cast<double>(counts.triggers);
    p.interval = stats::wilson_interval(counts.hits1, counts.triggers);
    points.push_back(p);
  }
  return points;
}

std::vector<double> shift_grid(double from, double to, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be > 0");
  std::vector<double> grid;
  if (from > to) return grid;
  const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) grid.push_back(from + step * static_cast<double>(i));
  return grid;
}

double recover_gaussian_sigma(std::span<const ShapePoint> scan, double alpha,
                              double trigger_sigma) {
  require_sorted_scan(scan);
  const double baseline = scan_baseline(scan);
  std::vector<double> weights(scan.size());
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double left = scan[i == 0 ? 0 : i - 1].shift;
    const double right = scan[i + 1 == scan.size() ? i : i + 1].shift;
    weights[i] = std::max(0.0, scan[i].value - baseline) * 0.5 * (right - left);
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("scan has no signal above baseline");
  double mean = 0.0;
  for (std::size_t i = 0; i < scan.size(); ++i) mean += weights[i] * scan[i].shift;
  mean /= total;
  double variance = 0.0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double d = scan[i].shift - mean;
    variance += weights[i] * d * d;
  }
  variance /= total;

  const EnvelopeSpec unit{EnvelopeShape::gaussian, 1.0, 1.0};
  const double truncation = unit.profile_variance();
  const double green = (variance - alpha * alpha / 3.0) / truncation - trigger_sigma * trigger_sigma;
  return std::sqrt(std::max(0.0, green));
}

double scan_half_max_width(std::span<const ShapePoint> scan) {
  require_sorted_scan(scan);
  const double baseline = scan_baseline(scan);
  const auto peak = std::max_element(scan.begin(), scan.end(),
                                     [](const auto& a, const auto& b) { return a.value < b.value; });
  const double half = baseline + 0.5 * (peak->value - baseline);
  if (!(peak->value > baseline)) throw std::invalid_argument("scan has no signal above baseline");

  auto crossing = [&](std::size_t below, std::size_t above) {
    const auto& a = scan[below];
    const auto& b = scan[above];
    return a.shift + (half - a.value) * (b.shift - a.shift) / (b.value - a.value);
  };

  std::size_t first = 0;
  while (scan[first].value < half) ++first;
  std::size_t last = scan.size() - 1;
  while (scan[last].value < half) --last;
  const double left = first == 0 ? scan.front().shift : crossing(first - 1, first);
  const double right = last + 1 == scan.size() ? scan.back().shift : crossing(last + 1, last);
  return right - left;
}

double scan_peak_shift(std::span<const ShapePoint> scan) {
  if (scan.empty()) throw std::invalid_argument("empty scan");
  const auto peak = std::max_element(scan.begin(), scan.end(),
                                     [](const auto& a, const auto& b) { return a.value < b.value; });
  return peak->shift;
}

nlohmann::json to_json(const CoincidenceReport& r) {
  auto estimate = [](const ProbabilityEstimate& e) {
    return nlohmann::json{{"hits", e.hits},
                          {"value", e.value},
                          {"ci95", {e.interval.lower, e.interval.upper}},
                          {"standard_error", e.standard_error},
                          {"effective_trials", e.effective_trials}};
  };
  nlohmann::json j;
  j["n0"] = r.n0;
  j["alpha"] = r.alpha_used;
  j["p1"] = estimate(r.p1);
  j["p2"] = estimate(r.p2);
  j["p3"] = estimate(r.p3);
  j["p1p2"] = {{"value", r.product.value},
               {"ci95", {r.product.interval.lower, r.product.interval.upper}},
               {"standard_error", r.product.standard_error}};
  j["difference_standard_error"] = r.difference_standard_error;
  j["p0_theoretical"] = r.p0_theoretical;
  j["verdict"] = std::string(to_string(r.verdict));
  j["low_intensity"] = {{"flagged", r.intensity.flagged},
                        {"product", r.intensity.product},
                        {"floor", r.intensity.floor}};
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace anticorr
