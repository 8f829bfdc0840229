#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anticorr/stats.hpp"
#include "anticorr/timetag.hpp"
#include "json.hpp"

namespace anticorr {

struct WindowConfig {
  double alpha = 1e-8;  // half-width of the coincidence window (seconds)
  double shift = 0.0;   // D1 window offset, used by the shape scan only

  void validate() const;
};

/// Raw window counts: for every D0 trigger at t0, hit_i means some D_i
/// event satisfies |t0 - t_i| <= alpha (D1 uses t0 + shift).
struct CoincidenceCounts {
  std::uint64_t triggers = 0;
  std::uint64_t hits1 = 0;
  std::uint64_t hits2 = 0;
  std::uint64_t hits_both = 0;

  bool operator==(const CoincidenceCounts&) const = default;
};

/// Consecutive triggers whose windows overlap (gap <= 2 alpha) can share
/// arm events, so their hit indicators are not independent. A cluster is a
/// maximal run of such triggers; `moments[i][j]` sums S_i S_j over clusters
/// where S = (triggers, hits1, hits2, hits_both) within the cluster.
struct TriggerClusters {
  std::uint64_t count = 0;
  std::array<std::array<std::uint64_t, 4>, 4> moments{};
};

/// Single pass with one monotone pointer per arm; O(total events).
/// Throws std::invalid_argument on a non-positive alpha.
CoincidenceCounts count_coincidences(const EventStreams& streams, const WindowConfig& window,
                                     TriggerClusters* clusters = nullptr);

struct ProbabilityEstimate {
  std::uint64_t hits = 0;
  double value = 0.0;
  stats::Interval interval;  // Wilson 95% over effective_trials
  double standard_error = 0.0;
  /// Trigger count deflated by the cluster design effect (<= n0).
  double effective_trials = 0.0;
};

struct ProductEstimate {
  double value = 0.0;
  stats::Interval interval;  // value +/- 1.96 propagated standard errors
  double standard_error = 0.0;
};

enum class Verdict { copenhagen_consistent, planck_consistent, inconclusive };

std::string_view to_string(Verdict verdict);

struct IntensityDiagnostic {
  bool flagged = false;
  double product = 0.0;
  double floor = 0.0;
  std::string message;
};

struct CoincidenceReport {
  std::uint64_t n0 = 0;
  ProbabilityEstimate p1;
  ProbabilityEstimate p2;
  ProbabilityEstimate p3;
  ProductEstimate product;  // p1 * p2
  /// Delta-method standard error of p3 - p1 p2. Standard errors are
  /// cluster-robust: they reduce to the binomial and trinomial forms when
  /// no two trigger windows overlap.
  double difference_standard_error = 0.0;
  /// NaN when the streams do not say enough to compute it.
  double p0_theoretical = 0.0;
  Verdict verdict = Verdict::inconclusive;
  double alpha_used = 0.0;
  IntensityDiagnostic intensity;
  std::vector<std::string> warnings;
};

/// Estimates p1(alpha), p2(alpha), p3(alpha) from the D0-triggered windows
/// and renders the verdict. p0 defaults to the overlap probability implied
/// by the stream metadata (emission rate, packet support); pass it to
/// override. Throws std::invalid_argument("no trigger events") when D0 is
/// empty.
CoincidenceReport estimate_p(const EventStreams& streams, const WindowConfig& window,
                             std::optional<double> p0 = std::nullopt,
                             double intensity_floor = 1e-4);

/// Builds a report from counts (no verdict inputs beyond p0). Without
/// cluster moments every trigger is taken as independent.
CoincidenceReport report_from_counts(const CoincidenceCounts& counts, double alpha, double p0,
                                     double intensity_floor = 1e-4,
                                     const TriggerClusters* clusters = nullptr);

/// Intervals used by render_verdict: Wilson / propagated at this z.
inline constexpr double kVerdictZ = 3.0;

/// Decision rule:
///  - inconclusive unless p0 < p1 p2 (the run is significant);
///  - planck_consistent when the p3 interval contains p1 p2 and lies
///    entirely above p0;
///  - copenhagen_consistent when the p3 interval lies below the p1 p2
///    interval and reaches down to p0 or less, i.e. it sits inside
///    [0, p0 + interval width];
///  - inconclusive otherwise.
Verdict render_verdict(const CoincidenceReport& report, double p0);

/// Flags runs whose p1 p2 is at or below `floor`: such runs cannot tell a
/// single-photon source from a very faint wave source.
IntensityDiagnostic low_intensity_guard(const CoincidenceReport& report, double floor = 1e-4);

struct ShapePoint {
  double shift = 0.0;
  std::uint64_t hits = 0;
  double value = 0.0;
  stats::Interval interval;
};

/// p(s) = fraction of D0 triggers with a D1 event within alpha of t0 + s,
/// for every s, sorted by s. Requires an empty D2 channel (mirror
/// removed); throws std::invalid_argument otherwise or when D0 is empty.
std::vector<ShapePoint> shape_scan(const EventStreams& streams, double alpha,
                                   std::span<const double> shifts);

/// Evenly spaced grid [from, to] with `step`; empty when from > to.
std::vector<double> shift_grid(double from, double to, double step);

/// Standard deviation of the green packet recovered from a scan of a
/// Gaussian run: the scan variance minus the window's alpha^2 / 3 and the
/// trigger packet's variance, corrected for truncation. The baseline is
/// the mean of the outer 5% of points on each side, so the grid must reach
/// past the packet support.
double recover_gaussian_sigma(std::span<const ShapePoint> scan, double alpha, double trigger_sigma);

/// Full width at half maximum of the scan, linearly interpolated. For two
/// rectangular packets of duration T this is T.
double scan_half_max_width(std::span<const ShapePoint> scan);

/// Shift with the largest p(s) (first one on ties).
double scan_peak_shift(std::span<const ShapePoint> scan);

nlohmann::json to_json(const CoincidenceReport& report);

}  // namespace anticorr
