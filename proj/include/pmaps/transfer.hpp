#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "pmaps/grid.hpp"
#include "pmaps/map_model.hpp"

namespace pmaps {

/// Nodal collocation of F_s f = Σ_k (ψ_k')^s f∘ψ_k on the grid x_j = j/n.
/// The pullback points and weights are computed once per (map, s, n).
class CollocationOperator {
public:
  CollocationOperator(const PiecewiseMap& T, double s, int n_cells);

  int cells() const noexcept { return n_; }
  double s() const noexcept { return s_; }

  /// F_s f at the nodes, f interpolated linearly.
  GridFunction apply(const GridFunction& f) const;
  /// F_s f at an arbitrary point.
  double apply_at(const GridFunction& f, double x) const;
  /// F_s f at the cell midpoints (j + 1/2)/n.
  std::vector<double> apply_midpoints(const GridFunction& f) const;
  /// Σ_k (ψ_k'(x))^s, i.e. F_s 1.
  double weight_sum_at(double x) const;

private:
  struct Term {
    double point;
    double weight;
  };
  static void fill(const PiecewiseMap& T, double s, double x, Side side, std::vector<Term>& out);

  PiecewiseMap map_;
  double s_;
  int n_;
  std::vector<std::uint32_t> offsets_;
  std::vector<Term> terms_;
  std::vector<std::uint32_t> mid_offsets_;
  std::vector<Term> mid_terms_;
};

GridFunction apply_transfer(const PiecewiseMap& T, double s, const GridFunction& f);

/// Cell-to-cell discretization: L(j, i) = n ∫_{I_j} Σ_k (ψ_k')^s χ_{I_i}(ψ_k(x)) dx.
struct UlamMatrix {
  int n = 0;
  double s = 0.0;
  Eigen::SparseMatrix<double, Eigen::RowMajor> L;
  /// Entries whose adaptive quadrature missed the tolerance and fell back to a midpoint rule.
  int flagged_entries = 0;
};

UlamMatrix build_ulam(const PiecewiseMap& T, double s, int n_cells);

/// ∫_a^b (ψ_k'(x))^s dx by adaptive Gauss–Kronrod; sets *flagged if the
/// error estimate stayed above abs_tol and the midpoint fallback was used.
double integrate_psi_power(const PiecewiseMap& T, int k, double s, double a, double b, double abs_tol = 1e-14,
                           bool* flagged = nullptr);

struct SpectralResult {
  double gamma = 0.0;
  /// Discrete conformal measure: mass of each cell, summing to 1.
  std::vector<double> ms_weights;
  /// Right eigenvector as a nodal density, normalized to ∫ g dm̂ = 1.
  GridFunction density;
  double residual_left = 0.0;
  double residual_right = 0.0;
  int iterations_left = 0;
  int iterations_right = 0;
  bool converged = false;
  bool cesaro_engaged = false;
  int peripheral_count = 1;
  std::vector<std::pair<double, double>> support_estimate;
  bool ms_near_atomic = false;
};

/// Power iteration for the leading eigen-triple of L. `beta` is only used for
/// the near-atomic diagnostic of the conformal weights.
SpectralResult leading_spectrum(const UlamMatrix& U, double tol, int max_iter, double beta = 1.0);

/// Growth rate of the collocation iterates F_s^m 1.
double collocation_gamma(const CollocationOperator& F, double tol = 1e-12, int max_iter = 200000);

/// L f / gamma for cell-valued f: the discrete normalized operator whose
/// adjoint fixes the conformal weights.
std::vector<double> ulam_apply_normalized(const UlamMatrix& U, double gamma, const std::vector<double>& cell_values);

struct DensityResult {
  GridFunction density;
  int iterations = 0;
  bool converged = false;
  bool cesaro_engaged = false;
  bool in_cone = false;
};

/// Iterates f -> F_s f / γ_m from f = 1 with ∫ f dm̂ renormalized to 1 each step,
/// switching to Cesàro averages when the plain iterates stall.
DensityResult invariant_density(const CollocationOperator& F, const std::vector<double>& ms_weights, double tol,
                                int max_iter = 200000);

class DensityVanishes : public std::runtime_error {
public:
  DensityVanishes() : std::runtime_error("density vanishes on [0,beta]") {}
};

/// (g / A) χ_[0,β] with A = ∫_0^β g dm̂.
GridFunction restrict_density_gbeta(const GridFunction& g, double beta, const std::vector<double>& ms_weights);

struct LasotaYorkeResult {
  double alpha = 0.0;
  double b_hat = 0.0;
  bool pass = false;
  int samples = 0;
  std::uint64_t seed = 0;
};

/// Random non-increasing, non-negative test functions (sums of decreasing steps
/// and ramps), reproducible from the seed.
std::vector<GridFunction> random_cone_functions(int n_cells, int count, std::uint64_t seed);

LasotaYorkeResult lasota_yorke_probe(const CollocationOperator& F, double gamma, double t_prime_0,
                                     const std::vector<double>& ms_weights, int samples, std::uint64_t seed);

/// For each k: F̄^m χ_[0,a_k](0) - F̄^m χ_[0,a_k](1), m = 1..n_iter.
std::vector<std::vector<double>> hulse_probe(const CollocationOperator& F, const std::vector<double>& breakpoints,
                                             double gamma, int n_iter);

}  // namespace pmaps
