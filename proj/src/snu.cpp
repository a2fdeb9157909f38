#include "macrosup/snu.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "macrosup/normal.hpp"

namespace macrosup {

namespace {

constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)
constexpr double kInvSqrt2 = 0.70710678118654752440;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Moments on the standardized scale. lam is the mean, v the variance of the
// standard normal restricted to the interval at hand.
struct StdMoments {
  double mass;
  double lam;
  double v;
};

// Direct Gauss-Legendre integration over a finite standardized interval.
// Only used when the interval is so narrow that the erfc difference cancels,
// so the rule is effectively exact. Moments are accumulated about the
// interval midpoint to keep the variance free of cancellation.
StdMoments narrow_interval_moments(double a, double b) {
  const auto& gl = detail::gauss_legendre_20();
  const long double c = 0.5L * (static_cast<long double>(a) + b);
  const long double h = 0.5L * (static_cast<long double>(b) - a);
  constexpr long double inv_sqrt_2pi = 0.39894228040143267793994605993438L;
  long double m0 = 0.0L, m1 = 0.0L, m2 = 0.0L;
  for (int i = 0; i < 20; ++i) {
    const long double dz = h * gl.node[i];
    const long double z = c + dz;
    const long double f = gl.weight[i] * inv_sqrt_2pi * expl(-0.5L * z * z);
    m0 += f;
    m1 += f * dz;
    m2 += f * dz * dz;
  }
  m0 *= h;
  m1 *= h;
  m2 *= h;
  const long double lam_c = m1 / m0;
  const long double v = m2 / m0 - lam_c * lam_c;
  return {static_cast<double>(m0), static_cast<double>(c + lam_c),
          static_cast<double>(v < 0.0L ? 0.0L : v)};
}

// [a, +inf)
StdMoments right_tail_moments(double a) {
  const double mass = normal_upper_tail(a);
  if (!(mass >= kEmptyRegionMass)) return {0.0, 0.0, 0.0};
  double r;  // phi(a) / mass
  if (a >= 8.0) {
    r = kSqrt2OverPi / erfcx(a * kInvSqrt2);
  } else {
    r = normal_pdf(a) / mass;
  }
  const long double lam = r;
  long double v = 1.0L - lam * (lam - static_cast<long double>(a));
  if (v < 0.0L) v = 0.0L;
  return {mass, r, static_cast<double>(v)};
}

// [a, b] with 0 <= a < b, both finite.
StdMoments right_interval_moments(double a, double b) {
  const double mass_a = normal_upper_tail(a);
  const double mass_b = normal_upper_tail(b);
  const double mass = mass_a - mass_b;
  if (!(mass >= kEmptyRegionMass)) return {0.0, 0.0, 0.0};
  if (mass < 1e-6 * mass_a) return narrow_interval_moments(a, b);

  // exponent of phi(b)/phi(a), written to avoid forming b^2 - a^2 directly
  const double expo = -0.5 * (b - a) * (b + a);
  long double r, rb, mass_out = mass;
  if (a >= 8.0) {
    const double qa = erfcx(a * kInvSqrt2);
    const double qb = erfcx(b * kInvSqrt2);
    const double rho = std::exp(expo) * qb / qa;  // mass_b / mass_a
    r = kSqrt2OverPi / qa / (1.0 - rho);
    rb = r * std::exp(expo);
    mass_out = mass_a * (1.0 - rho);
    if (!(mass_out >= kEmptyRegionMass)) return {0.0, 0.0, 0.0};
  } else {
    r = normal_pdf(a) / mass;
    rb = normal_pdf(b) / mass;
  }
  const long double lam = r * (-std::expm1(expo));  // (phi(a) - phi(b)) / mass
  const long double s1 = static_cast<long double>(a) * r - static_cast<long double>(b) * rb;
  long double v = 1.0L + s1 - lam * lam;
  if (v < 0.0L) v = 0.0L;
  const long double vmax = 0.25L * (static_cast<long double>(b) - a) * (static_cast<long double>(b) - a);
  if (v > vmax) v = vmax;
  return {static_cast<double>(mass_out), static_cast<double>(lam), static_cast<double>(v)};
}

// (a, b) with a < 0 < b, both finite; the interval contains the mode, so
// nothing cancels.
StdMoments straddle_moments(double a, double b) {
  const double mass =
      0.5 * (std::erf(b * kInvSqrt2) + std::erf(-a * kInvSqrt2));
  const double phi_a = normal_pdf(a);
  const double phi_b = normal_pdf(b);
  const long double lam = (static_cast<long double>(phi_a) - phi_b) / mass;
  const long double s1 =
      (static_cast<long double>(a) * phi_a - static_cast<long double>(b) * phi_b) / mass;
  long double v = 1.0L + s1 - lam * lam;
  if (v < 0.0L) v = 0.0L;
  return {mass, static_cast<double>(lam), static_cast<double>(v)};
}

StdMoments standardized_moments(double a, double b) {
  const bool a_inf = std::isinf(a);
  const bool b_inf = std::isinf(b);
  if (a_inf && b_inf) return {1.0, 0.0, 1.0};
  if (a_inf) {  // (-inf, b]: mirror of a right tail
    StdMoments m = right_tail_moments(-b);
    m.lam = -m.lam;
    return m;
  }
  if (b_inf) return right_tail_moments(a);
  if (a >= 0.0) return right_interval_moments(a, b);
  if (b <= 0.0) {  // mirror onto the positive side
    StdMoments m = right_interval_moments(-b, -a);
    m.lam = -m.lam;
    return m;
  }
  return straddle_moments(a, b);
}

const char* kBadStateMsg =
    "GaussianStateSpec: means must be finite, variances positive and finite, "
    "and var_x * var_p >= 1 (shot-noise-unit uncertainty bound)";

}  // namespace

GaussianStateSpec::GaussianStateSpec(double mx, double mp, double vx, double vp)
    : mean_x(mx), mean_p(mp), var_x(vx), var_p(vp) {
  require(std::isfinite(mx) && std::isfinite(mp), kBadStateMsg);
  require(std::isfinite(vx) && std::isfinite(vp) && vx > 0.0 && vp > 0.0,
          kBadStateMsg);
  require(vx * vp >= 1.0 - kUncertaintyTol, kBadStateMsg);
}

SqueezingPuritySpec::SqueezingPuritySpec(double db, double p)
    : squeezing_db(db), purity(p) {
  require(std::isfinite(db) && db <= 0.0,
          "SqueezingPuritySpec: squeezing_db must be finite and <= 0");
  require(std::isfinite(p) && p > 0.0 && p <= 1.0,
          "SqueezingPuritySpec: purity must lie in (0, 1]");
}

double db_to_variance(double db) {
  require(std::isfinite(db), "db_to_variance: input must be finite");
  return std::pow(10.0, db / 10.0);
}

double purity(const GaussianStateSpec& state) {
  return 1.0 / std::sqrt(state.var_x * state.var_p);
}

GaussianStateSpec from_squeezing_purity(const SqueezingPuritySpec& spec) {
  const double vp = db_to_variance(spec.squeezing_db);
  const double vx = 1.0 / (vp * spec.purity * spec.purity);
  return {0.0, 0.0, vx, vp};
}

GaussianStateSpec apply_loss(const GaussianStateSpec& state, double eta) {
  require(std::isfinite(eta) && eta >= 0.0 && eta <= 1.0,
          "apply_loss: eta must lie in [0, 1]");
  const double root_eta = std::sqrt(eta);
  return {root_eta * state.mean_x, root_eta * state.mean_p,
          eta * state.var_x + (1.0 - eta), eta * state.var_p + (1.0 - eta)};
}

std::optional<TruncatedMoments> truncated_moments(double mean, double var,
                                                  double lo, double hi) {
  require(std::isfinite(mean), "truncated_moments: mean must be finite");
  require(std::isfinite(var) && var > 0.0,
          "truncated_moments: var must be positive and finite");
  require(!std::isnan(lo) && !std::isnan(hi),
          "truncated_moments: bounds must not be NaN");
  require(lo < hi, "truncated_moments: degenerate interval (lo >= hi)");

  const double sigma = std::sqrt(var);
  const double a = std::isinf(lo) ? lo : (lo - mean) / sigma;
  const double b = std::isinf(hi) ? hi : (hi - mean) / sigma;

  const StdMoments m = standardized_moments(a, b);
  if (!(m.mass >= kEmptyRegionMass)) return std::nullopt;
  return TruncatedMoments{m.mass, mean + sigma * m.lam, var * m.v};
}

}  // namespace macrosup
