#pragma once

#include <optional>
#include <vector>

#include "pmaps/grid.hpp"
#include "pmaps/map_model.hpp"
#include "pmaps/transfer.hpp"

namespace pmaps {

struct SpectralOptions {
  int cells = 1024;
  double tol = 1e-10;
  int max_iter = 200000;
};

/// Ulam assembly plus leading_spectrum at one exponent.
SpectralResult spectrum_at(const PiecewiseMap& T, double s, const SpectralOptions& opt, double beta = 1.0);

/// log γ from the leading eigenvalue.
double pressure(const SpectralResult& spec);
double pressure(const PiecewiseMap& T, double s, const SpectralOptions& opt);

/// λ = ∫ log|T'| g dm̂ with cell-wise Gauss–Kronrod averages of log|T'| (split at breakpoints).
double lyapunov(const PiecewiseMap& T, const GridFunction& density, const std::vector<double>& ms_weights);

/// ∫_a^b log|T'(x)| dx for [a, b] inside one branch, by adaptive quadrature.
double integrate_log_derivative(const PiecewiseMap& T, int k, double a, double b);

double entropy(double s, double P, double lambda);

struct PressurePoint {
  double s = 0.0;
  double gamma = 0.0;
  double P = 0.0;
  double lambda = 0.0;
  double h = 0.0;
  bool converged = false;
  bool ms_near_atomic = false;
};

struct PressureCurve {
  std::vector<PressurePoint> points;
  /// Present when at least two converged points exist.
  std::optional<bool> nonincreasing;
  /// Present when at least three converged points exist.
  std::optional<bool> convex;
  /// |P(s)| <= 2e-2 on converged s in [1,2]; present for an indifferent β with such points.
  std::optional<bool> p1_zero;
};

PressureCurve pressure_curve(const PiecewiseMap& T, const std::vector<double>& s_grid, const SpectralOptions& opt,
                             bool beta_indifferent, double beta = 1.0);

class DensityNotBoundedBelow : public std::runtime_error {
public:
  DensityNotBoundedBelow() : std::runtime_error("density not bounded below") {}
};

/// G_s f = (1 / (γ g_β)) Σ_k (ψ_k')^s (g_β f)∘ψ_k at the nodes of [0, β]; zero above β.
GridFunction normalized_operator_apply(const CollocationOperator& F, double gamma, const GridFunction& g_beta,
                                       const GridFunction& f, double beta = 1.0);

/// max_f |μ̂(G_s f) - μ̂(f)| with μ̂ = g_β m̂; NaN when m̂ is near-atomic or g_β is not bounded below.
double equilibrium_duality_check(const CollocationOperator& F, const SpectralResult& spec,
                                 const std::vector<GridFunction>& test_fns, double beta = 1.0);

/// |∫ log ḡ dμ̂ + s λ(μ̂)| with log ḡ = -s log|T'| + log g_β - log g_β∘T; NaN under the same exclusions.
double lemma54_check(const PiecewiseMap& T, double s, const SpectralResult& spec, double beta = 1.0);

}  // namespace pmaps
