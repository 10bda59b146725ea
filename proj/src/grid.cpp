#include "pmaps/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pmaps {

GridFunction::GridFunction(int n_cells, double fill) : values_(static_cast<std::size_t>(n_cells) + 1, fill) {
  if (n_cells < 1) throw std::invalid_argument("a grid needs at least one cell");
}

GridFunction::GridFunction(std::vector<double> node_values) : values_(std::move(node_values)) {
  if (values_.size() < 2) throw std::invalid_argument("a grid needs at least two nodes");
}

GridFunction GridFunction::sample(int n_cells, const std::function<double(double)>& f) {
  GridFunction g(n_cells);
  for (int j = 0; j <= n_cells; ++j) g.values_[static_cast<std::size_t>(j)] = f(g.node(j));
  return g;
}

GridFunction GridFunction::indicator(int n_cells, double lo, double hi) {
  GridFunction g(n_cells);
  const double h = 1.0 / n_cells;
  for (int j = 0; j <= n_cells; ++j) {
    double a = std::max(0.0, g.node(j) - 0.5 * h), b = std::min(1.0, g.node(j) + 0.5 * h);
    double cover = std::max(0.0, std::min(b, hi) - std::max(a, lo));
    g.values_[static_cast<std::size_t>(j)] = cover / (b - a);
  }
  return g;
}

double GridFunction::operator()(double x) const noexcept {
  const int n = cells();
  if (!(x > 0.0)) return values_.front();
  if (x >= 1.0) return values_.back();
  double t = x * n;
  int j = std::min(static_cast<int>(t), n - 1);
  double frac = t - j;
  return values_[static_cast<std::size_t>(j)] +
         frac * (values_[static_cast<std::size_t>(j) + 1] - values_[static_cast<std::size_t>(j)]);
}

GridFunction& GridFunction::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  if (o.values_.size() != values_.size()) throw std::invalid_argument("grid size mismatch");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += o.values_[j];
  return *this;
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  GridFunction r = a;
  r += -1.0 * b;
  return r;
}

GridFunction operator*(double c, GridFunction f) {
  f *= c;
  return f;
}

double bv_variation(const GridFunction& f) {
  double v = 0.0;
  const auto& x = f.values();
  for (std::size_t j = 0; j + 1 < x.size(); ++j) v += std::abs(x[j + 1] - x[j]);
  return v;
}

bool is_nonincreasing(const GridFunction& f, double slack) {
  const auto& x = f.values();
  for (std::size_t j = 0; j + 1 < x.size(); ++j)
    if (x[j + 1] > x[j] + slack) return false;
  return true;
}

bool is_nonnegative(const GridFunction& f, double slack) {
  return std::all_of(f.values().begin(), f.values().end(), [&](double v) { return v >= -slack; });
}

std::vector<double> uniform_weights(int n_cells) {
  return std::vector<double>(static_cast<std::size_t>(n_cells), 1.0 / n_cells);
}

namespace {

void check_sizes(const GridFunction& f, const std::vector<double>& w) {
  if (static_cast<int>(w.size()) != f.cells()) throw std::invalid_argument("weights do not match the grid");
}

// ∫_0^1 |a + (b - a) t| dt.
double abs_linear_mean(double a, double b) {
  if ((a >= 0.0 && b >= 0.0) || (a <= 0.0 && b <= 0.0)) return 0.5 * std::abs(a + b);
  return 0.5 * (a * a + b * b) / (std::abs(a) + std::abs(b));
}

}  // namespace

double integrate(const GridFunction& f, const std::vector<double>& w) {
  check_sizes(f, w);
  const auto& x = f.values();
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * 0.5 * (x[j] + x[j + 1]);
  return s;
}

double l1_norm(const GridFunction& f, const std::vector<double>& w) {
  check_sizes(f, w);
  const auto& x = f.values();
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * abs_linear_mean(x[j], x[j + 1]);
  return s;
}

double integrate_on(const GridFunction& f, const std::vector<double>& w, double a, double b) {
  check_sizes(f, w);
  const int n = f.cells();
  a = std::max(a, 0.0);
  b = std::min(b, 1.0);
  if (!(b > a)) return 0.0;
  int j0 = std::clamp(static_cast<int>(a * n), 0, n - 1);
  int j1 = std::clamp(static_cast<int>(std::ceil(b * n)), 1, n);
  double s = 0.0;
  for (int j = j0; j < j1; ++j) {
    double u = std::max(a, static_cast<double>(j) / n), v = std::min(b, static_cast<double>(j + 1) / n);
    if (v <= u) continue;
    s += w[static_cast<std::size_t>(j)] * n * (v - u) * 0.5 * (f(u) + f(v));
  }
  return s;
}

double mass_on(const std::vector<double>& w, double a, double b) {
  const int n = static_cast<int>(w.size());
  a = std::max(a, 0.0);
  b = std::min(b, 1.0);
  if (!(b > a)) return 0.0;
  int j0 = std::clamp(static_cast<int>(a * n), 0, n - 1);
  int j1 = std::clamp(static_cast<int>(std::ceil(b * n)), 1, n);
  double s = 0.0;
  for (int j = j0; j < j1; ++j) {
    double u = std::max(a, static_cast<double>(j) / n), v = std::min(b, static_cast<double>(j + 1) / n);
    if (v > u) s += w[static_cast<std::size_t>(j)] * n * (v - u);
  }
  return s;
}

std::vector<double> cell_averages(const GridFunction& f) {
  const auto& x = f.values();
  std::vector<double> c(x.size() - 1);
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = 0.5 * (x[j] + x[j + 1]);
  return c;
}

GridFunction from_cell_values(const std::vector<double>& c) {
  const std::size_t n = c.size();
  std::vector<double> v(n + 1);
  v[0] = c[0];
  v[n] = c[n - 1];
  for (std::size_t j = 1; j < n; ++j) v[j] = 0.5 * (c[j - 1] + c[j]);
  return GridFunction(std::move(v));
}

double StepFunction::operator()(double x) const {
  if (values.empty()) return 0.0;
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  std::ptrdiff_t i = (it - edges.begin()) - 1;
  i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(values.size()) - 1);
  return values[static_cast<std::size_t>(i)];
}

double l1_distance(const GridFunction& f, const StepFunction& e, const std::vector<double>& w) {
  check_sizes(f, w);
  const int n = f.cells();
  std::vector<double> cuts = e.edges;
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  std::size_t c = 0;
  for (int j = 0; j < n; ++j) {
    const double xl = static_cast<double>(j) / n, xh = static_cast<double>(j + 1) / n;
    const double dens = w[static_cast<std::size_t>(j)] * n;
    double u = xl;
    while (c < cuts.size() && cuts[c] <= xl) ++c;
    std::size_t cc = c;
    while (u < xh) {
      double v = (cc < cuts.size() && cuts[cc] < xh) ? cuts[cc] : xh;
      double level = e(0.5 * (u + v));
      s += dens * (v - u) * abs_linear_mean(f(u) - level, f(v) - level);
      u = v;
      ++cc;
    }
  }
  return s;
}

}  // namespace pmaps
