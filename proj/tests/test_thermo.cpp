#include <doctest.h>

#include <cmath>

#include "pmaps/thermo.hpp"

using namespace pmaps;

namespace {

const double kLog2 = std::log(2.0);

}  // namespace

TEST_CASE("linear map thermodynamics") {
  PiecewiseMap D = builtin_map("doubling");
  for (double s : {0.3, 1.0, 1.7}) {
    SpectralResult r = spectrum_at(D, s, {512, 1e-12, 100000});
    double lam = lyapunov(D, r.density, r.ms_weights);
    CHECK(pressure(r) == doctest::Approx((1 - s) * kLog2).epsilon(1e-10));
    CHECK(lam == doctest::Approx(kLog2).epsilon(1e-10));
    CHECK(entropy(s, pressure(r), lam) == doctest::Approx(kLog2).epsilon(1e-10));
  }
}

TEST_CASE("Lyapunov exponent with Lebesgue as invariant measure") {
  // For example22 Lebesgue measure is invariant, and
  // int_0^1 log T' dx = 1/3 + (2 log 2 - 1) / (3/2) = (4/3) log 2 - 1/3.
  PiecewiseMap T = builtin_map("example22");
  const int n = 1024;
  double lam = lyapunov(T, GridFunction(n, 1.0), uniform_weights(n));
  CHECK(lam == doctest::Approx(4.0 / 3.0 * kLog2 - 1.0 / 3.0).epsilon(1e-9));
  CHECK(integrate_log_derivative(T, 2, 1.0 / 3.0, 1.0) == doctest::Approx((2 * kLog2 - 1) / 1.5).epsilon(1e-12));
}

TEST_CASE("pressure curve verdicts") {
  PressureCurve d = pressure_curve(builtin_map("doubling"), {0.5, 1.0, 1.5, 2.0}, {256, 1e-12, 100000}, false);
  CHECK(d.points.size() == 4);
  CHECK(d.nonincreasing == true);
  CHECK(d.convex == true);
  CHECK_FALSE(d.p1_zero.has_value());
  PressureCurve one = pressure_curve(builtin_map("doubling"), {1.0}, {256, 1e-12, 100000}, false);
  CHECK_FALSE(one.nonincreasing.has_value());
  CHECK_FALSE(one.convex.has_value());
  PressureCurve e = pressure_curve(builtin_map("example22"), {0.5, 1.0, 1.5}, {512, 1e-10, 200000}, true);
  REQUIRE(e.p1_zero.has_value());
  CHECK(*e.p1_zero);
  CHECK(e.points[0].P > 0.0);
}

TEST_CASE("normalized operator fixes constants on the doubling map") {
  PiecewiseMap D = builtin_map("doubling");
  CollocationOperator F(D, 0.5, 128);
  GridFunction one(128, 1.0);
  GridFunction g = normalized_operator_apply(F, std::sqrt(2.0), one, one);
  for (double v : g.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  GridFunction zero(128, 0.0);
  CHECK_THROWS_AS(normalized_operator_apply(F, std::sqrt(2.0), zero, one), DensityNotBoundedBelow);
}

TEST_CASE("duality and the cohomology gap") {
  PiecewiseMap D = builtin_map("doubling");
  const int n = 512;
  SpectralResult r = spectrum_at(D, 0.7, {n, 1e-12, 100000});
  CollocationOperator F(D, 0.7, n);
  std::vector<GridFunction> tests = {GridFunction::sample(n, [](double x) { return x; }),
                                     GridFunction::indicator(n, 0.0, 0.5), GridFunction(n, 1.0)};
  CHECK(equilibrium_duality_check(F, r, tests) <= 1e-10);
  CHECK(lemma54_check(D, 0.7, r) <= 1e-10);
}

TEST_CASE("near-atomic conformal measures are excluded") {
  PiecewiseMap T = builtin_map("example22");
  SpectralResult r = spectrum_at(T, 1.5, {512, 1e-10, 200000});
  CHECK(r.ms_near_atomic);
  CollocationOperator F(T, 1.5, 512);
  CHECK(std::isnan(equilibrium_duality_check(F, r, {GridFunction(512, 1.0)})));
  CHECK(std::isnan(lemma54_check(T, 1.5, r)));
}
