#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pmaps/map_model.hpp"

using namespace pmaps;

namespace {

// Closed forms for the two-branch indifferent example, written out here rather
// than taken from the loader.
double t1(double x) { return (2 + 3 * x - 2 * std::sqrt(1 - 3 * x)) / 3; }
double t2(double x) { return x - 0.75 * (1 - x) * (1 - x); }
double psi2(double x) { return 1 - (2.0 / 3.0) * (std::sqrt(4 - 3 * x) - 1); }

std::string two_branch(const std::string& b1, const std::string& b2, const std::string& mid = "1/2") {
  return R"({"name":"t","breakpoints":["0",")" + mid + R"(","1"],"branches":[)" + b1 + "," + b2 + "]}";
}

}  // namespace

TEST_CASE("built-in registry") {
  auto names = builtin_map_names();
  CHECK(names.size() == 4);
  for (const auto& n : names) {
    PiecewiseMap T = builtin_map(n);
    CHECK(T.name() == n);
    CHECK(T.content_hash().size() == 16);
  }
  CHECK_THROWS(builtin_map("nope"));
}

TEST_CASE("forward values and derivatives match closed forms") {
  PiecewiseMap T = builtin_map("example22");
  for (double x : {0.0, 0.1, 0.2, 0.3}) {
    CHECK(T.apply(x) == doctest::Approx(t1(x)).epsilon(1e-14));
    CHECK(T.derivative(x) == doctest::Approx(1 + 1 / std::sqrt(1 - 3 * x)).epsilon(1e-12));
  }
  for (double x : {1.0 / 3.0, 0.5, 0.9}) CHECK(T.apply(x) == doctest::Approx(t2(x)).epsilon(1e-14));
  CHECK(T.branch_index(1.0 / 3.0, Side::right) == 2);
  CHECK(T.branch_index(1.0 / 3.0, Side::left) == 1);
  CHECK(T.apply(1.0 / 3.0, Side::left) == doctest::Approx(1.0));
  CHECK(T.apply(1.0 / 3.0, Side::right) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::isinf(T.derivative(1.0 / 3.0, Side::left)));
  CHECK(T.derivative(1.0, Side::left) == doctest::Approx(1.0));
}

TEST_CASE("extended inverse clamps outside the image") {
  PiecewiseMap T = builtin_map("example24");
  // Branch 2 maps [1/4, 17/60) onto [0, 1/2).
  auto [lo, hi] = T.branch_image(2);
  CHECK(lo == doctest::Approx(0.0));
  CHECK(hi == doctest::Approx(0.5));
  CHECK(T.inverse_branch(2, 0.75) == doctest::Approx(17.0 / 60.0));
  CHECK(T.inverse_branch(2, 0.25) == doctest::Approx((0.25 + 3.75) / 15));
  CHECK(T.inverse_branch_deriv(2, 0.75) == 0.0);
  CHECK(T.inverse_branch_deriv(2, 0.25) == doctest::Approx(1.0 / 15));
  // Branch 4 starts at x = 2/5 where T = 1/2.
  CHECK(T.inverse_branch(4, 0.1) == doctest::Approx(0.4));
}

TEST_CASE("inverse branches invert and sum of derivatives is one") {
  for (const char* name : {"example22", "example24"}) {
    PiecewiseMap T = builtin_map(name);
    for (int i = 0; i <= 200; ++i) {
      double x = i / 200.0;
      double sum = 0.0;
      for (int k = 1; k <= T.size(); ++k) {
        sum += T.inverse_branch_deriv(k, x);
        auto [lo, hi] = T.branch_image(k);
        // Image endpoints land on the neighbouring branch's side convention.
        if (x > lo + 1e-9 && x < hi - 1e-9)
          CHECK(T.apply(T.inverse_branch(k, x)) == doctest::Approx(x).epsilon(1e-10));
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  PiecewiseMap T = builtin_map("example22");
  for (double x : {0.0, 0.3, 0.7, 1.0}) CHECK(T.inverse_branch(2, x) == doctest::Approx(psi2(x)).epsilon(1e-14));
}

TEST_CASE("complement branch reaches the top fixed point") {
  PiecewiseMap T = builtin_map("example24");
  const Branch& b = T.branch(5);
  CHECK(b.function().kind() == "complement");
  CHECK(b.psi(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.psi(0.0) == doctest::Approx(32.0 / 75.0).epsilon(1e-12));
  CHECK(T.apply(0.7) > 0.0);
  CHECK(T.apply(T.inverse_branch(5, 0.6)) == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(T.inverse_branch_deriv(5, 1.0, Side::left) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("one-sided limits") {
  CHECK(one_sided_limit([](double x) { return std::sin(x) / x; }, 0.0, Side::right) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::isinf(one_sided_limit([](double x) { return 1 / std::sqrt(1 - 3 * x); }, 1.0 / 3.0, Side::left)));
  CHECK(one_sided_limit([](double x) { return x < 0.5 ? 2.0 : 5.0; }, 0.5, Side::left) == doctest::Approx(2.0));
}

TEST_CASE("splitting at a point keeps the map") {
  PiecewiseMap T = builtin_map("doubling");
  auto [S, n_star] = T.with_breakpoint(0.75);
  CHECK(S.size() == 3);
  CHECK(n_star == 2);
  for (double x : {0.1, 0.6, 0.8}) CHECK(S.apply(x) == doctest::Approx(T.apply(x)));
  auto [U, m] = T.with_breakpoint(0.5);
  CHECK(U.size() == 2);
  CHECK(m == 1);
}

TEST_CASE("table branches") {
  std::string json = two_branch(R"({"table":[[0,0],[0.25,0.4],[0.5,1]]})", R"({"table":[[0.5,0],[1,1]]})");
  PiecewiseMap T = map_from_json_text(json);
  CHECK(T.apply(0.125) == doctest::Approx(0.2));
  CHECK(T.derivative(0.3) == doctest::Approx(2.4));
  CHECK(T.inverse_branch(1, 0.7) == doctest::Approx(0.375));
  CHECK(T.inverse_branch_deriv(1, 0.2) == doctest::Approx(1 / 1.6));
}

TEST_CASE("schema errors") {
  const std::string ok1 = R"({"expr":"2*x","inverse_expr":"x/2"})";
  const std::string ok2 = R"({"expr":"2*x-1","inverse_expr":"(x+1)/2"})";
  CHECK_NOTHROW(map_from_json_text(two_branch(ok1, ok2)));
  CHECK_THROWS_AS(map_from_json_text("{"), SchemaError);
  CHECK_THROWS_AS(map_from_json_text(R"({"breakpoints":["0","1"]})"), SchemaError);
  CHECK_THROWS_AS(map_from_json_text(two_branch(ok1, ok2, "1.5")), BreakpointError);
  CHECK_THROWS_AS(map_from_json_text(R"({"breakpoints":["0","1/2","1/2","1"],"branches":[)" + ok1 + "," + ok1 +
                                     "," + ok2 + "]}"),
                  BreakpointError);
  try {
    map_from_json_text(two_branch(R"({"expr":"0.25-(x-0.25)^2"})", ok2));
    FAIL("expected a monotonicity error");
  } catch (const MonotonicityError& e) {
    CHECK(e.branch() == 1);
  }
  // Image leaves [0,1].
  CHECK_THROWS_AS(map_from_json_text(two_branch(R"({"expr":"3*x"})", ok2)), SchemaError);
  // Inverse disagrees with the forward expression.
  CHECK_THROWS_AS(map_from_json_text(two_branch(R"({"expr":"2*x","inverse_expr":"x/3"})", ok2)), SchemaError);
  // Complement only as the last branch.
  CHECK_THROWS_AS(map_from_json_text(two_branch(R"({"complement":true})", ok2)), SchemaError);
}

TEST_CASE("files load and bad paths fail") {
  auto path = std::filesystem::temp_directory_path() / "pmaps_test_map.json";
  {
    std::ofstream f(path);
    f << *builtin_map_json("doubling");
  }
  PiecewiseMap T = resolve_map(path.string());
  CHECK(T.content_hash() == builtin_map("doubling").content_hash());
  std::filesystem::remove(path);
  CHECK_THROWS(resolve_map("/nonexistent/map.json"));
}

TEST_CASE("content hash is FNV-1a") {
  // Reference values of the 64-bit FNV-1a function.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(builtin_map("example22").content_hash() != builtin_map("example24").content_hash());
}
