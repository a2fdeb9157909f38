#pragma once

namespace macrosup {

// Standard normal density at z.
double normal_pdf(double z);

// Upper tail P(Z >= z) of the standard normal. Evaluated through erfc so it
// stays accurate for large z instead of cancelling against 1; underflows to 0
// only around z ~ 38.5.
double normal_upper_tail(double z);

// Scaled complementary error function exp(x^2) * erfc(x).
//
// For x >= 4 this is evaluated with the Laplace continued fraction (modified
// Lentz scheme), which keeps the result at ~1 ulp without ever forming
// exp(x^2); below that the direct product is safe. For x < about -26.6 the
// true value exceeds the double range and +infinity is returned.
double erfcx(double x);

namespace detail {

// 20-point Gauss-Legendre rule on [-1, 1]. Used for truncation intervals so
// narrow that differencing two tail probabilities would cancel.
struct GaussLegendre20 {
  double node[20];
  double weight[20];
};
const GaussLegendre20& gauss_legendre_20();

}  // namespace detail
}  // namespace macrosup
