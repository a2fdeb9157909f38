#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "macrosup/normal.hpp"
#include "macrosup/snu.hpp"
#include "oracle.hpp"
#include "reference_values.hpp"

using namespace macrosup;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Relative comparison that stays relative even for tiny magnitudes (doctest's
// Approx adds an absolute scale term, which would trivialize deep-tail masses).
bool rel_close(double got, double want, double tol) {
  if (want == 0.0) return got == 0.0;
  return std::fabs(got / want - 1.0) <= tol;
}
}  // namespace

TEST_SUITE("error function machinery") {
  TEST_CASE("erfcx matches frozen high-precision values") {
    for (const auto& f : ref::kErfcxFixtures) {
      CAPTURE(f.x);
      CHECK(rel_close(erfcx(f.x), f.value, 4e-15));
    }
  }

  TEST_CASE("erfcx asymptotics and shape") {
    // 1/(x sqrt(pi)) leading term far out
    const double x = 1e8;
    CHECK(rel_close(erfcx(x) * x * std::sqrt(4.0 * std::atan(1.0)), 1.0,
                    1e-8));
    // strictly decreasing
    double prev = erfcx(-26.0);
    for (double t = -25.0; t <= 30.0; t += 0.5) {
      const double v = erfcx(t);
      CHECK(v < prev);
      prev = v;
    }
    CHECK(erfcx(0.0) == 1.0);
    // below the representable range the scaled function overflows to +inf
    CHECK(std::isinf(erfcx(-27.0)));
  }

  TEST_CASE("normal density and tail") {
    CHECK(rel_close(normal_pdf(0.0), 0.39894228040143267794, 1e-15));
    CHECK(rel_close(normal_pdf(2.0),
                    0.39894228040143267794 * std::exp(-2.0), 1e-14));
    CHECK(normal_upper_tail(0.0) == 0.5);
    // complementarity
    for (double z : {0.3, 1.0, 2.5, 4.0}) {
      CAPTURE(z);
      CHECK(rel_close(normal_upper_tail(z) + normal_upper_tail(-z), 1.0,
                      1e-14));
    }
    // cross-check against direct quadrature of the density; the quadrature
    // tolerance is absolute, so scale it to the approximate tail size
    for (double z : {0.5, 1.0, 3.0, 6.0}) {
      CAPTURE(z);
      const double scale = normal_pdf(z) / std::max(z, 1.0);
      const double q = oracle::integrate(
          [](double t) {
            return 0.39894228040143267794 * std::exp(-0.5 * t * t);
          },
          z, 42.0, 1e-12 * scale);
      CHECK(rel_close(normal_upper_tail(z), q, 1e-9));
    }
    // far tail stays positive long after 1 - Phi(z) would round to 0
    CHECK(normal_upper_tail(30.0) > 0.0);
    CHECK(normal_upper_tail(30.0) < 1e-100);
  }
}

TEST_SUITE("state parameterization") {
  TEST_CASE("db_to_variance decade arithmetic") {
    CHECK(db_to_variance(0.0) == 1.0);
    CHECK(rel_close(db_to_variance(-5.7), ref::kVarP30mW, 1e-15));
    CHECK(rel_close(db_to_variance(-7.7), ref::kVarP70mW, 1e-15));
    CHECK(rel_close(db_to_variance(3.0), ref::kVarPlus3Db, 1e-15));
    CHECK(rel_close(db_to_variance(-10.0), 0.1, 1e-15));
    CHECK_THROWS_AS(db_to_variance(kNaN), std::invalid_argument);
    CHECK_THROWS_AS(db_to_variance(kInf), std::invalid_argument);
  }

  TEST_CASE("from_squeezing_purity reproduces the measured states") {
    const auto s30 = from_squeezing_purity(SqueezingPuritySpec(-5.7, 0.85));
    CHECK(s30.mean_x == 0.0);
    CHECK(s30.mean_p == 0.0);
    CHECK(rel_close(s30.var_p, ref::kVarP30mW, 1e-15));
    CHECK(rel_close(s30.var_x, ref::kVarX30mW, 1e-14));
    const auto s70 = from_squeezing_purity(SqueezingPuritySpec(-7.7, 0.66));
    CHECK(rel_close(s70.var_p, ref::kVarP70mW, 1e-15));
    CHECK(rel_close(s70.var_x, ref::kVarX70mW, 1e-14));
    const auto pure = from_squeezing_purity(SqueezingPuritySpec(-5.7, 1.0));
    CHECK(rel_close(pure.var_x, ref::kVarX57Pure, 1e-14));
    // round-trip through the purity definition
    CHECK(rel_close(purity(s30), 0.85, 1e-12));
    CHECK(rel_close(purity(s70), 0.66, 1e-12));
    CHECK(purity(GaussianStateSpec::vacuum()) == 1.0);
    // 0 dB at unit purity is exactly the vacuum
    const auto v = from_squeezing_purity(SqueezingPuritySpec(0.0, 1.0));
    CHECK(v.var_x == 1.0);
    CHECK(v.var_p == 1.0);
  }

  TEST_CASE("invalid parameterizations are rejected") {
    CHECK_THROWS_AS(SqueezingPuritySpec(0.5, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(SqueezingPuritySpec(-3.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(SqueezingPuritySpec(-3.0, 1.2), std::invalid_argument);
    CHECK_THROWS_AS(SqueezingPuritySpec(-3.0, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(SqueezingPuritySpec(kNaN, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(SqueezingPuritySpec(-3.0, kNaN), std::invalid_argument);

    CHECK_THROWS_AS(GaussianStateSpec(0, 0, 0.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(GaussianStateSpec(0, 0, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianStateSpec(0, 0, 0.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianStateSpec(kInf, 0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(GaussianStateSpec(0, kNaN, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(GaussianStateSpec(0, 0, 1, kInf), std::invalid_argument);
    // uncertainty bound carries a small tolerance for calibration jitter
    CHECK_NOTHROW(GaussianStateSpec(0, 0, 1.0, 1.0 - 0.5e-9));
    CHECK_THROWS_AS(GaussianStateSpec(0, 0, 1.0, 1.0 - 1e-8),
                    std::invalid_argument);
  }

  TEST_CASE("apply_loss beam-splitter arithmetic") {
    const auto s30 = from_squeezing_purity(SqueezingPuritySpec(-5.7, 0.85));
    const auto lossy = apply_loss(s30, 0.94);
    CHECK(rel_close(lossy.var_p, ref::kLossVar94, 1e-15));
    CHECK(rel_close(lossy.var_x, 0.94 * ref::kVarX30mW + 0.06, 1e-15));

    const GaussianStateSpec displaced(3.0, -2.0, 1.0, 1.0);
    const auto d = apply_loss(displaced, 0.25);
    CHECK(rel_close(d.mean_x, 1.5, 1e-15));
    CHECK(rel_close(d.mean_p, -1.0, 1e-15));
    CHECK(d.var_x == 1.0);

    // the vacuum is a fixed point of the channel
    for (double eta : {0.1, 0.5, 0.94}) {
      const auto v = apply_loss(GaussianStateSpec::vacuum(), eta);
      CHECK(v.var_x == 1.0);
      CHECK(v.var_p == 1.0);
      CHECK(v.mean_x == 0.0);
    }
    // eta = 1 is the identity, eta = 0 outputs vacuum
    const auto id = apply_loss(s30, 1.0);
    CHECK(id.var_x == s30.var_x);
    CHECK(id.var_p == s30.var_p);
    const auto vac = apply_loss(s30, 0.0);
    CHECK(vac.var_x == 1.0);
    CHECK(vac.var_p == 1.0);

    CHECK_THROWS_AS(apply_loss(s30, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(apply_loss(s30, 1.1), std::invalid_argument);
    CHECK_THROWS_AS(apply_loss(s30, kNaN), std::invalid_argument);
  }
}

TEST_SUITE("truncated moments") {
  TEST_CASE("frozen fixtures, including deep tails") {
    for (const auto& f : ref::kTruncFixtures) {
      CAPTURE(f.lo);
      CAPTURE(f.hi);
      const auto m = truncated_moments(f.mu, f.var, f.lo, f.hi);
      REQUIRE(m.has_value());
      const bool deep_tail = f.lo >= 8.0;
      // In the extreme tail the bound itself rounds (36/sqrt(2) is not a
      // double) and that alone moves the mass by ~1.5e-13 relative.
      const double mass_tol = f.lo >= 30.0 ? 1e-12 : 1e-13;
      CHECK(rel_close(m->prob, f.mass, mass_tol));
      CHECK(rel_close(m->mean, f.mean, 1e-13));
      CHECK(rel_close(m->var, f.variance, deep_tail ? 1e-9 : 1e-12));
    }
  }

  TEST_CASE("agrees with adaptive quadrature across a parameter sweep") {
    const double combos[][4] = {
        {0.0, 1.0, -0.5, 0.5},   {0.0, 1.0, 0.7, kInf},
        {0.0, 1.0, -kInf, -0.7}, {1.3, 0.27, -kInf, 0.9},
        {1.3, 0.27, 0.9, 2.0},   {-2.0, 9.0, 0.0, 4.0},
        {0.2, 5.14, 2.5, kInf},  {0.2, 5.14, -1.0, 2.5},
        {0.0, 1.0, -3.0, -0.2},  {5.0, 0.04, 4.9, 5.05},
    };
    for (const auto& c : combos) {
      CAPTURE(c[0]);
      CAPTURE(c[2]);
      CAPTURE(c[3]);
      const auto m = truncated_moments(c[0], c[1], c[2], c[3]);
      REQUIRE(m.has_value());
      const auto o = oracle::truncated_moments(c[0], c[1], c[2], c[3]);
      CHECK(rel_close(m->prob, o.mass, 1e-10));
      CHECK(std::fabs(m->mean - o.mean) <=
            1e-9 * (1.0 + std::fabs(o.mean)));
      CHECK(rel_close(m->var, o.var, 1e-8));
    }
  }

  TEST_CASE("narrow intervals keep their promised mass") {
    // Differencing tail probabilities would cancel catastrophically here;
    // the quadrature fallback must not.
    const double inv_sqrt_2pi = 0.39894228040143267794;
    {
      const double a = 1.0, w = 1e-7;
      const auto m = truncated_moments(0.0, 1.0, a, a + w);
      REQUIRE(m.has_value());
      const double mid = a + 0.5 * w;
      const double expected = inv_sqrt_2pi * std::exp(-0.5 * mid * mid) * w;
      CHECK(rel_close(m->prob, expected, 1e-9));
      CHECK(rel_close(m->mean, mid, 1e-12));
      CHECK(rel_close(m->var, w * w / 12.0, 1e-6));
    }
    {
      // Deep-tail narrow interval: here the scaled-erfc path differences two
      // nearly equal tail masses, which costs a few digits; ~1e-10 relative
      // is what survives, which is still far beyond naive differencing.
      const double a = 8.0, w = 1e-6;
      const auto m = truncated_moments(0.0, 1.0, a, a + w);
      REQUIRE(m.has_value());
      const double mid = a + 0.5 * w;
      const double expected = inv_sqrt_2pi * std::exp(-0.5 * mid * mid) * w;
      CHECK(rel_close(m->prob, expected, 1e-9));
      CHECK(rel_close(m->mean, mid, 1e-9));
    }
  }

  TEST_CASE("mirror symmetry is exact") {
    const double intervals[][2] = {
        {0.25, kInf}, {0.5, 2.0}, {8.0, 9.0}, {-1.0, 0.7}, {0.0, kInf}};
    for (const auto& iv : intervals) {
      CAPTURE(iv[0]);
      const auto right = truncated_moments(0.0, 1.0, iv[0], iv[1]);
      const auto left = truncated_moments(0.0, 1.0, -iv[1], -iv[0]);
      REQUIRE(right.has_value());
      REQUIRE(left.has_value());
      CHECK(left->prob == right->prob);
      CHECK(left->mean == -right->mean);
      CHECK(left->var == right->var);
    }
  }

  TEST_CASE("three-way splits conserve mass") {
    const double states[][2] = {{0.0, 1.0}, {0.3, 5.14}, {-1.2, 0.27}};
    for (const auto& st : states) {
      for (double t : {0.05, 0.5, 1.5, 4.0}) {
        CAPTURE(st[0]);
        CAPTURE(t);
        const auto lo = truncated_moments(st[0], st[1], -kInf, -t);
        const auto mid = truncated_moments(st[0], st[1], -t, t);
        const auto hi = truncated_moments(st[0], st[1], t, kInf);
        REQUIRE(lo.has_value());
        REQUIRE(mid.has_value());
        REQUIRE(hi.has_value());
        CHECK(rel_close(lo->prob + mid->prob + hi->prob, 1.0, 1e-13));
      }
    }
  }

  TEST_CASE("whole-line moments are the state moments") {
    const auto m = truncated_moments(1.7, 2.3, -kInf, kInf);
    REQUIRE(m.has_value());
    CHECK(m->prob == 1.0);
    CHECK(m->mean == 1.7);
    CHECK(m->var == 2.3);
  }

  TEST_CASE("empty regions come back as nullopt, not zeros") {
    CHECK_FALSE(truncated_moments(0.0, 1.0, 40.0, 41.0).has_value());
    CHECK_FALSE(truncated_moments(0.0, 1.0, 400.0, kInf).has_value());
    CHECK_FALSE(truncated_moments(0.0, 1.0, -kInf, -400.0).has_value());
    // just inside the representable band is still reported
    const auto m = truncated_moments(0.0, 1.0, 36.0, 37.0);
    CHECK(m.has_value());
  }

  TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(truncated_moments(0, -1.0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(truncated_moments(0, 0.0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(truncated_moments(kNaN, 1.0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(truncated_moments(0, 1.0, 2.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(truncated_moments(0, 1.0, 3.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(truncated_moments(0, 1.0, kNaN, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(truncated_moments(0, 1.0, 0.0, kNaN),
                    std::invalid_argument);
    CHECK_THROWS_AS(truncated_moments(0, kNaN, 0, 1), std::invalid_argument);
  }

  TEST_CASE("variance never exceeds the interval bound") {
    // var of any distribution on [a, b] is at most ((b-a)/2)^2
    const double cases[][2] = {{-0.3, 0.3}, {1.0, 1.5}, {8.0, 8.2}};
    for (const auto& iv : cases) {
      const auto m = truncated_moments(0.0, 1.0, iv[0], iv[1]);
      REQUIRE(m.has_value());
      const double half_width = 0.5 * (iv[1] - iv[0]);
      CHECK(m->var <= half_width * half_width);
      CHECK(m->var >= 0.0);
      CHECK(m->mean >= iv[0]);
      CHECK(m->mean <= iv[1]);
    }
  }
}
