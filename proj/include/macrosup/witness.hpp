#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "macrosup/series.hpp"
#include "macrosup/snu.hpp"

namespace macrosup {

// Three-region binning of one quadrature: region -1 is x <= center - S/2,
// region 0 the open interval in between, region +1 is x >= center + S/2.
// Samples landing exactly on a boundary go to the outer (closed) regions.
struct BinningSpec {
  double distance_S;
  double center;

  // Throws std::invalid_argument unless S >= 0 and both values are finite.
  BinningSpec(double distance_S, double center);

  // Bins centered on the marginal mean of the state.
  static BinningSpec centered(double distance_S, const GaussianStateSpec& state);

  int region_of(double x) const {
    if (x >= center + 0.5 * distance_S) return +1;
    if (x <= center - 0.5 * distance_S) return -1;
    return 0;
  }
};

// Region statistics of the x-distribution. Indices 0, 1, 2 correspond to
// regions -1, 0, +1. Region means are measured relative to the bin center;
// mean_x is the absolute marginal mean. Variances are unbiased (N-1) when
// empirical. counts stay zero for analytic stats.
struct RegionStats {
  std::array<double, 3> prob{};
  std::array<double, 3> mean{};
  std::array<double, 3> var{};
  std::array<std::size_t, 3> count{};
  double mean_x = 0.0;
  double var_x = 0.0;
  double center = 0.0;
  bool empirical = false;
};

inline constexpr int kRegionNeg = 0;
inline constexpr int kRegionMid = 1;
inline constexpr int kRegionPos = 2;

// One evaluation of the superposition witness at separation S.
// lhs = (ave_var_x + prob0 * delta) * var_p; a value below 1 certifies
// coherence between the outer regions at distance S.
struct WitnessResult {
  double distance_S;
  double delta;
  double ave_var_x;  // prob+ * var+ + prob- * var-
  double var_p;
  double lhs;
  bool violated;
  std::optional<double> uncertainty_lhs;
};

// Exact truncated-normal statistics of the x-marginal over the three regions.
// An outer region whose mass underflows is reported via
// InsufficientRegionSamples (the empty-region signal made loud); a vanished
// middle region is benign and comes back with zero probability.
RegionStats region_stats_analytic(const GaussianStateSpec& state,
                                  const BinningSpec& bins);

// Sample statistics over the three regions. Requires at least two samples in
// each outer region (InsufficientRegionSamples otherwise, naming the region).
RegionStats region_stats_empirical(const QuadratureSeries& samples,
                                   const BinningSpec& bins);

// The separation penalty entering the witness:
//   delta = (mean+ + S/2)^2 + (mean- - S/2)^2 + S^2/2 + var+ + var-
// with region means taken relative to the bin center.
double delta(const RegionStats& stats, double S);

// Witness left-hand side from region statistics and the conjugate variance.
WitnessResult witness_lhs(const RegionStats& stats, double var_p, double S);

// Mixture diagnostic on joint phase-space samples: the total p-variance of a
// proper mixture cannot fall below the region-weighted sum of conditional
// p-variances. Only a simulation can evaluate this (it conditions p on the
// x-region of each pair). slack = var_p_mixed - weighted_var_p; std_error is
// an asymptotic scale for slack under independence.
struct NoCoherenceDiagnostic {
  double var_p_mixed;
  double weighted_var_p;
  double slack;
  double std_error;
  std::array<std::size_t, 3> region_counts;
};
NoCoherenceDiagnostic no_coherence_bound(const JointSamples& joint,
                                         const BinningSpec& bins);

enum class SmaxStatus {
  ok,
  no_violation_at_zero,  // lhs(0) >= 1; s_max is reported as 0
  bracket_not_found,     // lhs never crossed 1 below the search ceiling
};

const char* to_string(SmaxStatus status);

struct SmaxResult {
  double s_max = 0.0;
  SmaxStatus status = SmaxStatus::ok;
  bool ceiling_shrunk = false;  // sample depletion forced the ceiling down
  double search_ceiling = 0.0;
  std::optional<double> uncertainty;
  std::size_t degenerate_redraws = 0;  // bootstrap redraw count, if any
};

// Largest S with lhs(S) < 1, found by bracketed bisection (absolute
// tolerance 1e-6). The bracket starts at [0, sigma_x] and grows by factors of
// 2 up to 20 sigma_x. Bins are centered on the marginal mean unless `center`
// overrides it.
SmaxResult smax_analytic(const GaussianStateSpec& state,
                         std::optional<double> center = std::nullopt);

struct SmaxOptions {
  std::optional<double> center;       // default: sample mean of x
  std::size_t bootstrap_resamples = 1000;  // 0 disables the uncertainty
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// Empirical s_max from separate x and p runs; the same sample set is re-binned
// at every trial S. The returned uncertainty is a bootstrap standard
// deviation of s_max. Sample depletion at large S shrinks the search ceiling
// (reported via ceiling_shrunk).
SmaxResult smax_empirical(const QuadratureSeries& x_samples,
                          const QuadratureSeries& p_samples,
                          const SmaxOptions& options = {});

enum class BootstrapStatistic { lhs, smax };

struct BootstrapOptions {
  BootstrapStatistic statistic = BootstrapStatistic::lhs;
  double distance_S = 0.0;            // used by the lhs statistic
  std::optional<double> center;       // default: per-resample sample mean
  std::size_t resamples = 1000;       // must be >= 100
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct BootstrapResult {
  double uncertainty = 0.0;
  std::size_t resamples = 0;
  std::size_t degenerate_redraws = 0;
  double redraw_fraction() const {
    const double total = static_cast<double>(resamples + degenerate_redraws);
    return total > 0.0 ? static_cast<double>(degenerate_redraws) / total : 0.0;
  }
};

// Nonparametric bootstrap over the chosen statistic. The x and p series are
// resampled independently (they come from separate runs); resamples are
// deterministic given the seed and bit-identical between serial and threaded
// execution. A resample that empties an outer region is redrawn and counted.
BootstrapResult bootstrap_uncertainty(const QuadratureSeries& x_samples,
                                      const QuadratureSeries& p_samples,
                                      const BootstrapOptions& options);

struct CurvePoint {
  double distance_S;
  double lhs;
};

// Analytic lhs(S) along a grid of separations (bins centered on the marginal
// mean).
std::vector<CurvePoint> theory_curve(const GaussianStateSpec& state,
                                     const std::vector<double>& s_grid);

// s_max over a (squeezing dB) x (purity) grid. Values are stored row-major
// with purity as the row index: value(i_purity, j_db) = s_max[i_purity * n_db + j_db].
// Nodes without a violation at S = 0 hold 0.
struct ContourGrid {
  std::vector<double> squeezing_db;  // ascending, size n_db
  std::vector<double> purity;        // ascending, size n_purity
  std::vector<double> s_max;         // size n_db * n_purity, row-major
};
ContourGrid contour_grid(double db_lo, double db_hi, std::size_t n_db,
                         double purity_lo, double purity_hi,
                         std::size_t n_purity);

// Uniform-width histogram normalized to unit mass over its support.
struct Histogram {
  std::vector<double> edges;    // size = density.size() + 1, ascending
  std::vector<double> density;
  std::size_t count = 0;
  bool empty = true;
};

// Separately normalized per-region densities plus the full unbinned density.
// Outer-region grids are anchored at center -+ S/2, so the gap between the
// outer supports is exactly S; the full histogram is anchored at the center.
struct RegionHistograms {
  Histogram full;
  Histogram neg;
  Histogram mid;
  Histogram pos;
  double bin_width = 0.0;
};
RegionHistograms region_histograms(const QuadratureSeries& samples,
                                   const BinningSpec& bins, double bin_width);

// Mean and unbiased variance helpers used by the empirical paths.
double sample_mean(std::span<const double> values);
double sample_variance(std::span<const double> values, double mean);

namespace detail {

// Bracketed search for the first crossing of lhs(S) = 1. `lhs_at` may throw
// InsufficientRegionSamples to signal that S exceeds what the data supports;
// the ceiling then shrinks toward the largest evaluable S. Evaluability must
// be downward-closed in S for this to make sense (larger S only ever moves
// the outer regions further out).
SmaxResult find_crossing(const std::function<double(double)>& lhs_at,
                         double sigma_x);

}  // namespace detail
}  // namespace macrosup
