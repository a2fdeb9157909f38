#include "macrosup/normal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace macrosup {

namespace {
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrtPi = 0.56418958354775628695;

// erfcx(x) * sqrt(pi) = 1 / (x + (1/2)/(x + 1/(x + (3/2)/(x + 2/(x + ...)))))
// Modified Lentz evaluation of the continued fraction; partial numerators are
// n/2, partial denominators are x throughout.
double erfcx_cf(double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-17;
  double f = tiny;
  double c = f;
  double d = 0.0;
  double a = 1.0;  // leading numerator
  for (int n = 0; n < 300; ++n) {
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < eps) break;
    a = 0.5 * (n + 1);
  }
  return kInvSqrtPi * f;
}
}  // namespace

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_upper_tail(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

double erfcx(double x) {
  if (x >= 4.0) return erfcx_cf(x);
  if (x >= -26.0) return std::exp(x * x) * std::erfc(x);
  return std::numeric_limits<double>::infinity();
}

namespace detail {

const GaussLegendre20& gauss_legendre_20() {
  static const GaussLegendre20 table = [] {
    GaussLegendre20 t{};
    constexpr int n = 20;
    for (int i = 0; i < n / 2; ++i) {
      // Newton iteration on P_n from the Chebyshev-like initial guess.
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      t.node[i] = -x;
      t.node[n - 1 - i] = x;
      t.weight[i] = w;
      t.weight[n - 1 - i] = w;
    }
    return t;
  }();
  return table;
}

}  // namespace detail
}  // namespace macrosup
