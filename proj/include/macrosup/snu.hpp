#pragma once

#include <optional>

namespace macrosup {

// Everything in this library works in shot-noise units: the vacuum state has
// unit variance in both quadratures and the uncertainty product obeys
// var_x * var_p >= 1. Quadrature values and distances carry SNU^(1/2).

// Tolerance applied to the uncertainty-product bound at construction.
inline constexpr double kUncertaintyTol = 1e-9;

// Region mass below this is reported as an empty region instead of moments.
inline constexpr double kEmptyRegionMass = 1e-300;

// A single-mode Gaussian state given by its quadrature means and variances.
// Cross-quadrature covariance is assumed zero: measured quadratures are taken
// to be aligned with the principal axes of the state.
struct GaussianStateSpec {
  double mean_x = 0.0;
  double mean_p = 0.0;
  double var_x = 1.0;
  double var_p = 1.0;

  GaussianStateSpec() = default;
  // Throws std::invalid_argument if a variance is not positive and finite, a
  // mean is not finite, or var_x * var_p < 1 - kUncertaintyTol.
  GaussianStateSpec(double mean_x, double mean_p, double var_x, double var_p);

  static GaussianStateSpec vacuum() { return {}; }
};

// Squeezed-state parameterization: squeezing in dB (<= 0, below shot noise)
// and purity in (0, 1].
struct SqueezingPuritySpec {
  double squeezing_db;
  double purity;

  SqueezingPuritySpec(double squeezing_db, double purity);
};

// Mass, mean and variance of a Gaussian restricted to an interval.
struct TruncatedMoments {
  double prob;
  double mean;
  double var;
};

// 10^(db/10). Squeezing is negative dB (below shot noise), anti-squeezing
// positive. Throws std::invalid_argument for non-finite input.
double db_to_variance(double db);

// Purity of a single-mode Gaussian state: 1 / sqrt(var_x * var_p).
double purity(const GaussianStateSpec& state);

// Zero-mean state with var_p = 10^(db/10) and var_x = 1 / (var_p * purity^2).
GaussianStateSpec from_squeezing_purity(const SqueezingPuritySpec& spec);

// Beam-splitter loss model: var' = eta * var + (1 - eta), mean' = sqrt(eta) * mean.
// Throws std::invalid_argument unless 0 <= eta <= 1.
GaussianStateSpec apply_loss(const GaussianStateSpec& state, double eta);

// Moments of the normal(mean, var) density restricted to [lo, hi]; lo may be
// -infinity and hi +infinity. Returns nullopt when the interval mass falls
// below kEmptyRegionMass (the empty-region signal). Throws
// std::invalid_argument for var <= 0, NaN bounds, or lo >= hi.
//
// Tail evaluation goes through erfc/erfcx so boundaries many sigma out do not
// cancel; intervals so narrow that differencing tail masses would lose
// precision are integrated directly with a Gauss-Legendre rule.
std::optional<TruncatedMoments> truncated_moments(double mean, double var,
                                                  double lo, double hi);

}  // namespace macrosup
