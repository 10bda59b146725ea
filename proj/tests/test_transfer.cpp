#include <doctest.h>

#include <cmath>
#include <random>

#include "pmaps/grid.hpp"
#include "pmaps/transfer.hpp"

using namespace pmaps;

namespace {

// Inverse branches of example22 and their derivatives in closed form.
double psi1(double x) { return (1 - std::pow(std::sqrt(4 - 3 * x) - 1, 2)) / 3; }
double dpsi1(double x) { return 1 - 1 / std::sqrt(4 - 3 * x); }
double psi2(double x) { return 1 - (2.0 / 3.0) * (std::sqrt(4 - 3 * x) - 1); }
double dpsi2(double x) { return 1 / std::sqrt(4 - 3 * x); }

double transfer22(double s, const std::function<double(double)>& f, double x) {
  return std::pow(dpsi1(x), s) * f(psi1(x)) + std::pow(dpsi2(x), s) * f(psi2(x));
}

// Composite Simpson rule after x = b - (b - a) u^2, which smooths the root-type
// behaviour of psi_1'^s at x = 1. Independent of the library's quadrature.
double simpson(const std::function<double(double)>& f, double a, double b, int m = 400) {
  auto g = [&](double u) { return f(b - (b - a) * u * u) * 2 * (b - a) * u; };
  double h = 1.0 / m, acc = g(0.0) + g(1.0);
  for (int i = 1; i < m; ++i) acc += (i % 2 ? 4 : 2) * g(i * h);
  return acc * h / 3;
}

}  // namespace

TEST_CASE("grid pairing is exact for linear interpolants") {
  auto w = uniform_weights(4);
  auto f = GridFunction::sample(4, [](double x) { return x - 0.3; });
  CHECK(integrate(f, w) == doctest::Approx(0.2));
  CHECK(l1_norm(f, w) == doctest::Approx(0.29).epsilon(1e-14));
  CHECK(bv_variation(GridFunction::sample(64, [](double x) { return x * x; })) == doctest::Approx(1.0));
  CHECK(integrate_on(GridFunction(8, 2.0), uniform_weights(8), 0.1, 0.6) == doctest::Approx(1.0));
  // Node values are the covered fraction of each node's cell box.
  auto ind = GridFunction::indicator(4, 0.125, 0.625);
  CHECK(ind[0] == 0.0);
  CHECK(ind[1] == 1.0);
  CHECK(ind[2] == 1.0);
  CHECK(ind[3] == 0.0);
  CHECK(GridFunction::indicator(4, 0.25, 0.5)[1] == 0.5);
  StepFunction e{{0.0, 0.5, 1.0}, {0.25, 0.75}};
  auto id = GridFunction::sample(16, [](double x) { return x; });
  CHECK(l1_distance(id, e, uniform_weights(16)) == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("collocation agrees with the closed-form operator") {
  PiecewiseMap T = builtin_map("example22");
  auto f = [](double x) { return 1.0 - x * x; };
  for (double s : {0.5, 1.0, 1.3}) {
    CollocationOperator F(T, s, 256);
    GridFunction g = F.apply(GridFunction::sample(256, f));
    for (int j = 0; j <= 256; j += 16) {
      // Linear interpolation of f between nodes costs O(h^2).
      CHECK(g[j] == doctest::Approx(transfer22(s, f, j / 256.0)).epsilon(1e-4));
    }
    CHECK(F.apply_at(GridFunction::sample(256, f), 0.3) == doctest::Approx(transfer22(s, f, 0.3)).epsilon(1e-4));
  }
  GridFunction one = apply_transfer(T, 1.0, GridFunction(64, 1.0));
  for (double v : one.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Ulam row sums are cell averages of the transferred constant") {
  PiecewiseMap T = builtin_map("example22");
  const int n = 64;
  for (double s : {0.5, 1.0, 1.5}) {
    UlamMatrix U = build_ulam(T, s, n);
    CHECK(U.flagged_entries <= 1);
    Eigen::VectorXd rows = U.L * Eigen::VectorXd::Ones(n);
    for (int j = 0; j < n; ++j) {
      double avg = n * simpson([&](double x) { return transfer22(s, [](double) { return 1.0; }, x); },
                               static_cast<double>(j) / n, static_cast<double>(j + 1) / n);
      CHECK(rows[j] == doctest::Approx(avg).epsilon(1e-9));
    }
  }
}

TEST_CASE("Ulam entries for the doubling map") {
  UlamMatrix U = build_ulam(builtin_map("doubling"), 1.0, 8);
  // Cell j pulls back onto cells j/2 and (j+8)/2 with weight one half each.
  for (int j = 0; j < 8; ++j) {
    CHECK(U.L.coeff(j, j / 2) == doctest::Approx(0.5));
    CHECK(U.L.coeff(j, (j + 8) / 2) == doctest::Approx(0.5));
  }
  CHECK(integrate_psi_power(builtin_map("example22"), 2, 1.0, 0.2, 0.7) == doctest::Approx(psi2(0.7) - psi2(0.2)));
}

TEST_CASE("leading spectrum of the doubling map") {
  UlamMatrix U = build_ulam(builtin_map("doubling"), 0.5, 256);
  SpectralResult r = leading_spectrum(U, 1e-12, 10000);
  CHECK(r.converged);
  CHECK(r.gamma == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.peripheral_count == 1);
  CHECK_FALSE(r.ms_near_atomic);
  double total = 0.0;
  for (double w : r.ms_weights) total += w;
  CHECK(total == doctest::Approx(1.0));
  CollocationOperator F(builtin_map("doubling"), 0.5, 256);
  CHECK(collocation_gamma(F) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("left eigenvector is conformal and right eigenvector is fixed") {
  PiecewiseMap T = builtin_map("ly-convex");
  const int n = 512;
  UlamMatrix U = build_ulam(T, 0.8, n);
  SpectralResult r = leading_spectrum(U, 1e-12, 100000);
  REQUIRE(r.converged);
  Eigen::Map<const Eigen::VectorXd> w(r.ms_weights.data(), n);
  Eigen::VectorXd wl = U.L.transpose() * w;
  CHECK((wl - r.gamma * w).lpNorm<Eigen::Infinity>() <= 1e-9);
  // Plain power iteration in the test gives the cell-valued right eigenvector.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  for (int it = 0; it < 3000; ++it) v = (U.L * v).normalized();
  CHECK((U.L * v).norm() == doctest::Approx(r.gamma).epsilon(1e-10));
  auto img = ulam_apply_normalized(U, r.gamma, std::vector<double>(v.data(), v.data() + n));
  for (int j = 0; j < n; j += 37) CHECK(img[j] == doctest::Approx(v[j]).epsilon(1e-9));
  GridFunction g = from_cell_values(std::vector<double>(v.data(), v.data() + n));
  g *= 1.0 / integrate(g, r.ms_weights);
  for (int j = 0; j <= n; j += 37) CHECK(r.density[j] == doctest::Approx(g[j]).epsilon(1e-8));
  CHECK(integrate(r.density, r.ms_weights) == doctest::Approx(1.0));
}

TEST_CASE("invariant density") {
  PiecewiseMap T = builtin_map("ly-convex");
  const int n = 1024;
  CollocationOperator F(T, 1.0, n);
  DensityResult d = invariant_density(F, uniform_weights(n), 1e-11);
  CHECK(d.converged);
  CHECK(d.in_cone);
  CHECK(integrate(d.density, uniform_weights(n)) == doctest::Approx(1.0));
  // Fixed up to the discrete eigenvalue, which is 1 + O(h^2) at s = 1.
  GridFunction Fg = F.apply(d.density);
  double gam = integrate(Fg, uniform_weights(n));
  CHECK(gam == doctest::Approx(1.0).epsilon(1e-5));
  for (int j = 0; j <= n; j += 64) CHECK(Fg[j] == doctest::Approx(gam * d.density[j]).epsilon(1e-8));
  CHECK(is_nonincreasing(d.density, 1e-10));
}

TEST_CASE("restriction to [0, beta]") {
  GridFunction g = GridFunction::sample(8, [](double x) { return 2 - x; });
  GridFunction r = restrict_density_gbeta(g, 0.5, uniform_weights(8));
  CHECK(r[8] == 0.0);
  CHECK(integrate_on(r, uniform_weights(8), 0.0, 0.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(restrict_density_gbeta(GridFunction(8, 0.0), 1.0, uniform_weights(8)), DensityVanishes);
}

TEST_CASE("random cone functions are reproducible") {
  auto a = random_cone_functions(128, 10, 42), b = random_cone_functions(128, 10, 42);
  auto c = random_cone_functions(128, 10, 43);
  REQUIRE(a.size() == 10);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].values() == b[i].values());
    CHECK(is_nonincreasing(a[i], 0.0));
    CHECK(is_nonnegative(a[i]));
    differs = differs || a[i].values() != c[i].values();
  }
  CHECK(differs);
}

TEST_CASE("variation probes") {
  PiecewiseMap T = builtin_map("example22");
  CollocationOperator F(T, 0.5, 512);
  double g = collocation_gamma(F);
  LasotaYorkeResult r = lasota_yorke_probe(F, g, 2.0, uniform_weights(512), 10, 3);
  CHECK(r.alpha == doctest::Approx(0.75));
  CHECK(r.samples == 11);
  CHECK(r.seed == 3);
  CHECK(r.pass);
  auto h = hulse_probe(F, T.breakpoints(), g, 5);
  CHECK(h.size() == static_cast<std::size_t>(T.size()));
  for (const auto& row : h) {
    CHECK(row.size() == 5);
    for (double v : row) CHECK(std::isfinite(v));
  }
}

TEST_CASE("endpoint gaps of the doubling map halve") {
  PiecewiseMap D = builtin_map("doubling");
  CollocationOperator F(D, 1.0, 1024);
  auto h = hulse_probe(F, D.breakpoints(), 1.0, 8);
  REQUIRE(h.size() == 2);
  for (int m = 2; m < 8; ++m) CHECK(h[0][m] == doctest::Approx(0.5 * h[0][m - 1]).epsilon(1e-9));
  for (double g : h[1]) CHECK(g == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("conformality and the sup bound on random functions") {
  PiecewiseMap T = builtin_map("example22");
  const int n = 512;
  UlamMatrix U = build_ulam(T, 0.5, n);
  SpectralResult r = leading_spectrum(U, 1e-12, 200000);
  REQUIRE(r.converged);
  Eigen::Map<const Eigen::VectorXd> w(r.ms_weights.data(), n);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd f(n);
    for (int j = 0; j < n; ++j) f[j] = normal(rng);
    double lhs = w.dot(U.L * f), rhs = r.gamma * w.dot(f);
    CHECK(std::abs(lhs - rhs) <= 1e-6 * f.norm());

    std::vector<double> nodes(n + 1);
    for (double& v : nodes) v = normal(rng);
    GridFunction g(nodes);
    double bound = bv_variation(g) + l1_norm(g, r.ms_weights);
    for (double v : g.values()) CHECK(std::abs(v) <= bound + 1e-12);
  }
}
