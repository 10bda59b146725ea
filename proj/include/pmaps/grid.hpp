#pragma once

#include <functional>
#include <vector>

namespace pmaps {

/// Real function on the uniform nodes x_j = j/n (j = 0..n) of [0,1],
/// interpolated linearly between nodes.
class GridFunction {
public:
  GridFunction() = default;
  explicit GridFunction(int n_cells, double fill = 0.0);
  explicit GridFunction(std::vector<double> node_values);

  static GridFunction sample(int n_cells, const std::function<double(double)>& f);
  /// Node value = average of f over the box [x_j - h/2, x_j + h/2] ∩ [0,1].
  /// For an indicator this is the covered fraction of the box.
  static GridFunction indicator(int n_cells, double lo, double hi);

  int cells() const noexcept { return static_cast<int>(values_.size()) - 1; }
  double node(int j) const noexcept { return static_cast<double>(j) / cells(); }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  double& operator[](std::size_t j) { return values_[j]; }

  /// Linear interpolation; x is clamped into [0,1].
  double operator()(double x) const noexcept;

  GridFunction& operator*=(double c);
  GridFunction& operator+=(const GridFunction& o);

private:
  std::vector<double> values_;
};

GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double c, GridFunction f);

/// Total variation of the piecewise-linear interpolant.
double bv_variation(const GridFunction& f);

bool is_nonincreasing(const GridFunction& f, double slack);
bool is_nonnegative(const GridFunction& f, double slack = 0.0);

/// Uniform cell weights 1/n.
std::vector<double> uniform_weights(int n_cells);

/// ∫ f dm for the measure with piecewise-constant density w_j * n on cell j:
/// Σ w_j (f_j + f_{j+1}) / 2, exact for the linear interpolant.
double integrate(const GridFunction& f, const std::vector<double>& weights);
/// ∫ |f| dm, exact for the linear interpolant (sign changes inside cells handled).
double l1_norm(const GridFunction& f, const std::vector<double>& weights);
/// ∫_a^b f dm for the linear interpolant.
double integrate_on(const GridFunction& f, const std::vector<double>& weights, double a, double b);
/// m([a, b]).
double mass_on(const std::vector<double>& weights, double a, double b);

/// Cell values v_j of f averaged over cell j (exact for the interpolant).
std::vector<double> cell_averages(const GridFunction& f);
/// Nodal values from cell values: interior nodes average their two cells.
GridFunction from_cell_values(const std::vector<double>& cells);

/// Right-continuous step function with values[i] on [edges[i], edges[i+1]).
struct StepFunction {
  std::vector<double> edges;
  std::vector<double> values;
  double operator()(double x) const;
};

/// ∫ |f - e| dm with f the linear interpolant and e a step function.
double l1_distance(const GridFunction& f, const StepFunction& e, const std::vector<double>& weights);

}  // namespace pmaps
