#pragma once

#include <string>
#include <vector>

#include "pmaps/grid.hpp"
#include "pmaps/map_model.hpp"
#include "pmaps/transfer.hpp"

namespace pmaps {

struct Cylinder {
  std::vector<int> word;
  double lo = 0.0;
  double hi = 0.0;
  bool contains_beta = false;
};

/// lo <= β < hi, except that the cylinder ending at 1 is closed there so it
/// claims β = 1.
bool cylinder_contains(double lo, double hi, double beta);

/// All nonempty depth-r cylinders ordered by left endpoint.
std::vector<Cylinder> refine_partition(const PiecewiseMap& T, int r, double beta = 1.0);

/// (d_1..d_r) with d_{i+1} the branch (right-side convention) containing T^i x.
std::vector<int> cylinder_containing(const PiecewiseMap& T, double x, int r);

struct ConditionBResult {
  /// M̂_1..M̂_r for the depths that had admissible cylinders.
  std::vector<double> m_hat;
  std::vector<int> cylinder_counts;
  /// Per depth, the value min_n ||F_s^n χ||_∞ / γ^n for each admissible cylinder.
  std::vector<std::vector<double>> per_cylinder;
  bool strictly_decreasing = false;
  std::vector<std::string> warnings;
};

/// Numerical condition (B) probe on the grid of F. The cylinders come from T,
/// which should carry a breakpoint at β.
ConditionBResult condition_B_probe(const CollocationOperator& F, const PiecewiseMap& T, double gamma, double beta,
                                   int r_max, int n_max);

/// Max m̂-mass of a depth-r cylinder not containing β, for r = 1..r_max.
std::vector<double> max_cylinder_mass(const PiecewiseMap& T, double beta, const std::vector<double>& ms_weights,
                                      int r_max);

struct ParabolicScaling {
  /// w_0 .. w_{r_max+1}.
  std::vector<double> w;
  /// D_r = (T^r)'(w_{r+1}) for r = 1..r_max (index r-1).
  std::vector<double> D;
  double theta_hat = 0.0;
  /// Log-log fit beats the log-linear fit over the fitting window.
  bool polynomial = false;
  bool strictly_increasing = false;
  bool truncated = false;
};

ParabolicScaling parabolic_scaling(const PiecewiseMap& T, int n_star, int r_max);

/// m̂-average of f on every depth-r cylinder, as a step function.
StepFunction conditional_expectation(const GridFunction& f, int r, const std::vector<double>& ms_weights,
                                     const PiecewiseMap& T, std::vector<std::string>* warnings = nullptr);
StepFunction conditional_expectation(const StepFunction& f, int r, const std::vector<double>& ms_weights,
                                     const PiecewiseMap& T, std::vector<std::string>* warnings = nullptr);

struct Lemma46Result {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// ∫|f - E(f|U_r)| dm̂ <= c (M̂_r + m̂(I_{(N*,...,N*)})); m_hat[r-1] is M̂_r.
Lemma46Result lemma46_check(const GridFunction& f, double c, int r, const std::vector<double>& m_hat,
                            const std::vector<double>& ms_weights, const PiecewiseMap& T, int n_star);

}  // namespace pmaps
