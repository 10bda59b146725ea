// One line per acceptance criterion; exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "pmaps/aconvex.hpp"
#include "pmaps/cylinders.hpp"
#include "pmaps/grid.hpp"
#include "pmaps/map_model.hpp"
#include "pmaps/thermo.hpp"
#include "pmaps/transfer.hpp"

using namespace pmaps;

namespace {

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] %2d %-34s %s\n", pass ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double max_dev_from_one(const GridFunction& g) {
  double d = 0.0;
  for (double v : g.values()) d = std::max(d, std::abs(v - 1.0));
  return d;
}

void frobenius_perron() {
  const int n = 4096;
  auto t0 = std::chrono::steady_clock::now();
  CollocationOperator F22(builtin_map("example22"), 1.0, n);
  double d22 = max_dev_from_one(F22.apply(GridFunction(n, 1.0)));
  CollocationOperator F24(builtin_map("example24"), 1.0, n);
  double d24 = max_dev_from_one(F24.apply(GridFunction(n, 1.0)));
  double t = seconds_since(t0);
  report(1, "transfer of 1 at s=1", d22 <= 1e-10 && d24 <= 1e-6 && t < 1.0,
         fmt("dev22=%.2e dev24=%.2e time=%.2fs", d22, d24, t));
}

void inverse_derivative_sum() {
  PiecewiseMap T = builtin_map("example22");
  double worst = 0.0;
  for (int j = 0; j <= 4096; ++j) {
    double x = j / 4096.0;
    worst = std::max(worst, std::abs(T.inverse_branch_deriv(1, x) + T.inverse_branch_deriv(2, x) - 1.0));
  }
  report(2, "inverse derivatives sum to one", worst <= 1e-9, fmt("max|psi1'+psi2'-1|=%.2e", worst));
}

void linear_oracle() {
  PiecewiseMap T = builtin_map("doubling");
  SpectralOptions opt{4096, 1e-12, 200000};
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double s : {0.25, 0.5, 1.0, 1.5, 2.0}) {
    SpectralResult r = spectrum_at(T, s, opt);
    double lam = lyapunov(T, r.density, r.ms_weights);
    double P = pressure(r);
    worst = std::max({worst, std::abs(r.gamma - std::pow(2.0, 1.0 - s)), std::abs(P - (1.0 - s) * std::log(2.0)),
                      std::abs(lam - std::log(2.0)), std::abs(entropy(s, P, lam) - std::log(2.0)),
                      max_dev_from_one(r.density)});
    for (double w : r.ms_weights) worst = std::max(worst, std::abs(w * 4096 - 1.0));
  }
  double t = seconds_since(t0);
  report(3, "doubling map closed forms", worst <= 1e-6 && t < 5.0, fmt("max err=%.2e time=%.2fs", worst, t));
}

void condition_C_threshold() {
  PiecewiseMap T = builtin_map("example22");
  bool ok = true;
  std::string d;
  for (double s : {0.25, 0.5, 0.75, 1.0, 1.25, 1.5}) {
    bool pass = check_condition_C(T, s, 4096).pass;
    ok = ok && pass == (s <= 1.0);
    d += fmt("%.2f:", s) + (pass ? "pass " : "fail ");
  }
  report(4, "average convexity threshold", ok, d);
}

void markov_detection() {
  MarkovResult m24 = check_markov(builtin_map("example24"));
  bool witness = false;
  for (int k : m24.violating_branches) witness = witness || k == 3;
  bool m22 = check_markov(builtin_map("example22")).markov;
  bool md = check_markov(builtin_map("doubling")).markov;
  std::string d = "example24 violating branches:";
  for (int k : m24.violating_branches) d += " " + std::to_string(k);
  report(5, "Markov partition detection", !m24.markov && witness && m22 && md, d);
}

void indifferent_classification() {
  bool ok = true;
  std::string d;
  for (const char* name : {"example22", "example24", "doubling"}) {
    PiecewiseMap T = builtin_map(name);
    BetaResult b = find_beta(T);
    auto [Ts, n_star] = T.with_breakpoint(b.beta);
    BetaClassification c = classify_beta(Ts, b.beta, n_star);
    bool want_indiff = std::string(name) != "doubling";
    if (want_indiff) ok = ok && c.type == BetaType::indifferent && std::abs(c.psi_deriv_left - 1.0) <= 1e-9;
    else ok = ok && c.type == BetaType::expanding;
    ok = ok && std::abs(b.beta - 1.0) <= 1e-12;
    d += std::string(name) + "=" + to_string(c.type) + " ";
  }
  report(6, "type of the distinguished point", ok, d);
}

void pressure_at_one() {
  bool ok = true;
  std::string d;
  for (const char* name : {"example22", "example24"}) {
    auto t0 = std::chrono::steady_clock::now();
    SpectralResult r = spectrum_at(builtin_map(name), 1.0, {8192, 1e-10, 200000});
    double t = seconds_since(t0);
    double P = pressure(r);
    ok = ok && r.converged && std::abs(P) <= 1e-2 && t < 60.0;
    d += std::string(name) + fmt(": P=%.2e t=%.2fs ", P, t);
  }
  report(7, "pressure vanishes at s=1", ok, d);
}

void pressure_shape() {
  std::vector<double> grid;
  for (int i = 1; i <= 8; ++i) grid.push_back(0.25 * i);
  PressureCurve c = pressure_curve(builtin_map("example22"), grid, {1024, 1e-10, 200000}, true);
  bool flat = true;
  for (const auto& p : c.points)
    if (p.converged && (p.s == 1.0 || p.s == 1.5 || p.s == 2.0)) flat = flat && std::abs(p.P) <= 2e-2;
  bool ok = c.nonincreasing.value_or(false) && c.convex.value_or(false) && flat;
  report(8, "pressure curve shape", ok,
         fmt("P(0.25)=%.4f P(1)=%.2e P(2)=%.2e", c.points.front().P, c.points[3].P, c.points.back().P));
}

void parabolic() {
  PiecewiseMap T = builtin_map("example22");
  ParabolicScaling p = parabolic_scaling(T, 2, 30);
  bool below_one = true;
  for (double w : p.w) below_one = below_one && w < 1.0;
  bool ok = p.theta_hat >= 1.7 && p.theta_hat <= 2.3 && p.strictly_increasing && below_one && p.w.size() == 32;
  report(9, "scaling near the indifferent point", ok,
         fmt("theta=%.4f w_31=%.6f", p.theta_hat, p.w.back()));
}

void condition_B() {
  PiecewiseMap D = builtin_map("doubling");
  CollocationOperator Fd(D, 1.0, 2048);
  ConditionBResult bd = condition_B_probe(Fd, D, collocation_gamma(Fd), 1.0, 10, 200);
  double worst = bd.m_hat.size() == 10 ? 0.0 : 1.0;
  for (std::size_t r = 0; r < bd.m_hat.size(); ++r)
    worst = std::max(worst, std::abs(bd.m_hat[r] - std::pow(2.0, -static_cast<double>(r + 1))));
  PiecewiseMap E = builtin_map("example22");
  CollocationOperator Fe(E, 0.5, 1024);
  ConditionBResult be = condition_B_probe(Fe, E, collocation_gamma(Fe), 1.0, 8, 2000);
  bool ok = worst <= 1e-9 && be.strictly_decreasing && be.m_hat.size() == 8;
  report(10, "cylinder sup probe", ok,
         fmt("doubling err=%.2e example22 M1=%.4f M8=%.4f", worst, be.m_hat.front(), be.m_hat.back()));
}

void lasota_yorke() {
  bool ok = true;
  std::string d;
  struct Case {
    const char* name;
    double s;
  };
  for (Case c : {Case{"example22", 0.5}, Case{"doubling", 1.0}}) {
    PiecewiseMap T = builtin_map(c.name);
    CollocationOperator F(T, c.s, 1024);
    SpectralResult spec = spectrum_at(T, c.s, {1024, 1e-10, 200000});
    LasotaYorkeResult r = lasota_yorke_probe(F, collocation_gamma(F), check_condition_1(T).t_prime_0,
                                             spec.ms_weights, 20, 7);
    ok = ok && r.pass && std::isfinite(r.b_hat);
    d += std::string(c.name) + fmt(": b=%.3f ", r.b_hat);
  }
  report(11, "variation inequality", ok, d);
}

void cone_and_markov_operator() {
  const int n = 1024;
  const double s = 0.5;
  PiecewiseMap T = builtin_map("example22");
  CollocationOperator F(T, s, n);
  const double gc = collocation_gamma(F);
  UlamMatrix U = build_ulam(T, s, n);
  SpectralResult spec = leading_spectrum(U, 1e-12, 200000);
  auto fs = random_cone_functions(n, 50, 11);
  double cone_slack = 0.0, integral_gap = 0.0, contraction_excess = -1.0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    GridFunction g = F.apply(fs[i]);
    g *= 1.0 / gc;
    for (int j = 0; j < n; ++j) cone_slack = std::max(cone_slack, g[j + 1] - g[j]);
    for (double v : g.values()) cone_slack = std::max(cone_slack, -v);

    auto cells = cell_averages(fs[i]);
    auto img = ulam_apply_normalized(U, spec.gamma, cells);
    double a = 0.0, b = 0.0;
    for (int j = 0; j < n; ++j) {
      a += spec.ms_weights[j] * img[j];
      b += spec.ms_weights[j] * cells[j];
    }
    integral_gap = std::max(integral_gap, std::abs(a - b));

    auto other = cell_averages(fs[(i + 1) % fs.size()]);
    std::vector<double> diff(cells.size());
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = cells[j] - 2.0 * other[j];
    auto dimg = ulam_apply_normalized(U, spec.gamma, diff);
    double na = 0.0, nb = 0.0;
    for (int j = 0; j < n; ++j) {
      na += spec.ms_weights[j] * std::abs(dimg[j]);
      nb += spec.ms_weights[j] * std::abs(diff[j]);
    }
    contraction_excess = std::max(contraction_excess, na - nb);
  }
  bool ok = cone_slack <= 1e-10 && integral_gap <= 1e-8 && contraction_excess <= 1e-8;
  report(12, "cone and Markov operator", ok,
         fmt("cone=%.1e integral=%.1e L1 excess=%.1e", cone_slack, integral_gap, contraction_excess));
}

void duality() {
  const int n = 4096;
  PiecewiseMap T = builtin_map("example22");
  SpectralResult spec = spectrum_at(T, 1.0, {n, 1e-12, 200000});
  CollocationOperator F(T, 1.0, n);
  std::vector<GridFunction> tests = {GridFunction::sample(n, [](double x) { return x; }),
                                     GridFunction::sample(n, [](double x) { return x * x; }),
                                     GridFunction::indicator(n, 0.0, 0.5), GridFunction(n, 1.0)};
  double gap = equilibrium_duality_check(F, spec, tests);
  double l54 = lemma54_check(T, 1.0, spec);
  report(13, "equilibrium duality", gap <= 1e-3 && l54 <= 2e-2, fmt("duality=%.2e lemma=%.2e", gap, l54));
}

void conditional_expectation_bound() {
  bool ok = true;
  int count = 0;
  // Doubling: dyadic cylinders, uniform weights, M_r = 2^-r.
  {
    PiecewiseMap D = builtin_map("doubling");
    const int n = 1024;
    auto w = uniform_weights(n);
    std::vector<double> m(6);
    for (int r = 1; r <= 6; ++r) m[r - 1] = std::pow(2.0, -r);
    auto f = GridFunction::sample(n, [](double x) { return 1.0 - x; });
    ok = ok && lemma46_check(f, 1.0, 4, m, w, D, 2).pass;
    ok = ok && lemma46_check(GridFunction(n, 3.0), 1.0, 4, m, w, D, 2).pass;
    count += 2;
  }
  {
    PiecewiseMap T = builtin_map("example22");
    const int n = 1024;
    CollocationOperator F(T, 0.5, n);
    ConditionBResult b = condition_B_probe(F, T, collocation_gamma(F), 1.0, 6, 2000);
    SpectralResult spec = spectrum_at(T, 0.5, {n, 1e-10, 200000});
    for (GridFunction f : random_cone_functions(n, 20, 5)) {
      f *= 1.0 / bv_variation(f);
      for (int r = 1; r <= 6; ++r) {
        ok = ok && lemma46_check(f, 1.0, r, b.m_hat, spec.ms_weights, T, 2).pass;
        ++count;
      }
    }
  }
  report(14, "conditional expectation bound", ok, std::to_string(count) + " instances");
}

}  // namespace

int main() {
  const std::function<void()> criteria[] = {frobenius_perron, inverse_derivative_sum, linear_oracle,
                                            condition_C_threshold, markov_detection, indifferent_classification,
                                            pressure_at_one, pressure_shape, parabolic, condition_B,
                                            lasota_yorke, cone_and_markov_operator, duality,
                                            conditional_expectation_bound};
  int id = 0;
  for (const auto& c : criteria) {
    ++id;
    try {
      c();
    } catch (const std::exception& e) {
      report(id, "criterion raised", false, e.what());
    }
  }
  std::printf("%d of 14 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
