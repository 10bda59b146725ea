#include "pmaps/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pmaps {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_slope(const Branch& br, double x) {
  double d = br.deriv(x, Side::right);
  // Exactly indifferent points contribute nothing; d = +inf only at excluded endpoints.
  return d == 1.0 ? 0.0 : std::log(std::abs(d));
}

// Σ_j w_j n ∫_{I_j} h(k, x) dx, splitting every cell at the map's breakpoints.
template <class H>
double integrate_against_weights(const PiecewiseMap& T, const std::vector<double>& w, const H& h) {
  const int n = static_cast<int>(w.size());
  const auto& a = T.breakpoints();
  double total = 0.0;
  std::size_t k = 1;
  for (int j = 0; j < n; ++j) {
    const double xl = static_cast<double>(j) / n, xh = static_cast<double>(j + 1) / n;
    const double dens = w[static_cast<std::size_t>(j)] * n;
    if (dens == 0.0) continue;
    while (k + 1 < a.size() && a[k] <= xl) ++k;
    double u = xl;
    std::size_t kk = k;
    while (u < xh) {
      double v = std::min(xh, a[kk]);
      const int branch = static_cast<int>(kk);
      auto f = [&](double x) { return h(branch, x); };
      total += dens * GK::integrate(f, u, v, 8, 1e-10);
      u = v;
      if (kk + 1 < a.size()) ++kk;
      else break;
    }
  }
  return total;
}

bool gbeta_bounded_below(const GridFunction& g, double beta) {
  for (int j = 0; j <= g.cells(); ++j)
    if (g.node(j) <= beta && !(g[static_cast<std::size_t>(j)] > 1e-8)) return false;
  return true;
}

}  // namespace

SpectralResult spectrum_at(const PiecewiseMap& T, double s, const SpectralOptions& opt, double beta) {
  UlamMatrix U = build_ulam(T, s, opt.cells);
  return leading_spectrum(U, opt.tol, opt.max_iter, beta);
}

double pressure(const SpectralResult& spec) { return std::log(spec.gamma); }

double pressure(const PiecewiseMap& T, double s, const SpectralOptions& opt) {
  return pressure(spectrum_at(T, s, opt));
}

double integrate_log_derivative(const PiecewiseMap& T, int k, double a, double b) {
  const Branch& br = T.branch(k);
  return GK::integrate([&](double x) { return log_slope(br, x); }, a, b, 15, 1e-12);
}

double lyapunov(const PiecewiseMap& T, const GridFunction& g, const std::vector<double>& w) {
  return integrate_against_weights(T, w, [&](int k, double x) { return log_slope(T.branch(k), x) * g(x); });
}

double entropy(double s, double P, double lambda) { return P + s * lambda; }

PressureCurve pressure_curve(const PiecewiseMap& T, const std::vector<double>& s_grid, const SpectralOptions& opt,
                             bool beta_indifferent, double beta) {
  PressureCurve c;
  for (double s : s_grid) {
    SpectralResult spec = spectrum_at(T, s, opt, beta);
    PressurePoint p;
    p.s = s;
    p.gamma = spec.gamma;
    p.P = pressure(spec);
    p.lambda = lyapunov(T, spec.density, spec.ms_weights);
    p.h = entropy(s, p.P, p.lambda);
    p.converged = spec.converged;
    p.ms_near_atomic = spec.ms_near_atomic;
    c.points.push_back(p);
  }
  std::vector<const PressurePoint*> conv;
  for (const auto& p : c.points)
    if (p.converged) conv.push_back(&p);
  if (conv.size() >= 2) {
    bool ok = true;
    for (std::size_t i = 1; i < conv.size(); ++i)
      if (conv[i]->P > conv[i - 1]->P + 1e-6) ok = false;
    c.nonincreasing = ok;
  }
  if (conv.size() >= 3) {
    bool ok = true;
    for (std::size_t i = 1; i + 1 < conv.size(); ++i) {
      const double s0 = conv[i - 1]->s, s1 = conv[i]->s, s2 = conv[i + 1]->s;
      // Reduces to P0 - 2 P1 + P2 on a uniform grid.
      double d2 = (conv[i - 1]->P * (s2 - s1) + conv[i + 1]->P * (s1 - s0) - conv[i]->P * (s2 - s0)) /
                  (0.5 * (s2 - s0));
      if (d2 < -1e-5) ok = false;
    }
    c.convex = ok;
  }
  if (beta_indifferent) {
    bool any = false, ok = true;
    for (const auto* p : conv) {
      if (p->s < 1.0 - 1e-12 || p->s > 2.0 + 1e-12) continue;
      any = true;
      if (std::abs(p->P) > 2e-2) ok = false;
    }
    if (any) c.p1_zero = ok;
  }
  return c;
}

GridFunction normalized_operator_apply(const CollocationOperator& F, double gamma, const GridFunction& g_beta,
                                       const GridFunction& f, double beta) {
  const int n = F.cells();
  GridFunction prod(n);
  for (int j = 0; j <= n; ++j) {
    auto jj = static_cast<std::size_t>(j);
    prod[jj] = g_beta[jj] * f[jj];
  }
  GridFunction Fp = F.apply(prod);
  GridFunction out(n, 0.0);
  for (int j = 0; j <= n; ++j) {
    auto jj = static_cast<std::size_t>(j);
    if (out.node(j) > beta) continue;
    if (!(g_beta[jj] > 1e-8)) throw DensityNotBoundedBelow();
    out[jj] = Fp[jj] / (gamma * g_beta[jj]);
  }
  return out;
}

double equilibrium_duality_check(const CollocationOperator& F, const SpectralResult& spec,
                                 const std::vector<GridFunction>& test_fns, double beta) {
  if (spec.ms_near_atomic) return kNaN;
  GridFunction gb;
  try {
    gb = restrict_density_gbeta(spec.density, beta, spec.ms_weights);
  } catch (const DensityVanishes&) {
    return kNaN;
  }
  if (!gbeta_bounded_below(gb, beta)) return kNaN;
  const int n = F.cells();
  double gap = 0.0;
  for (const GridFunction& f : test_fns) {
    GridFunction Gf = normalized_operator_apply(F, spec.gamma, gb, f, beta);
    GridFunction a(n), b(n);
    for (int j = 0; j <= n; ++j) {
      auto jj = static_cast<std::size_t>(j);
      a[jj] = Gf[jj] * gb[jj];
      b[jj] = f[jj] * gb[jj];
    }
    gap = std::max(gap, std::abs(integrate(a, spec.ms_weights) - integrate(b, spec.ms_weights)));
  }
  return gap;
}

double lemma54_check(const PiecewiseMap& T, double s, const SpectralResult& spec, double beta) {
  if (spec.ms_near_atomic) return kNaN;
  GridFunction gb;
  try {
    gb = restrict_density_gbeta(spec.density, beta, spec.ms_weights);
  } catch (const DensityVanishes&) {
    return kNaN;
  }
  if (!gbeta_bounded_below(gb, beta)) return kNaN;
  const auto& w = spec.ms_weights;
  std::vector<double> w_beta = w;
  for (std::size_t j = 0; j < w_beta.size(); ++j)
    if (static_cast<double>(j) / static_cast<double>(w_beta.size()) >= beta) w_beta[j] = 0.0;
  double log_gbar = integrate_against_weights(T, w_beta, [&](int k, double x) {
    const Branch& br = T.branch(k);
    double gx = gb(x);
    double tail = std::log(gx) - std::log(gb(br.value(x)));
    return (-s * log_slope(br, x) + tail) * gx;
  });
  double lambda = lyapunov(T, gb, w_beta);
  return std::abs(log_gbar + s * lambda);
}

}  // namespace pmaps
