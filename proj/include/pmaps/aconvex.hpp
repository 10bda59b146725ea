#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmaps/map_model.hpp"

namespace pmaps {

struct Condition1Result {
  bool pass = false;
  double t_prime_0 = 0.0;
  /// T_k'(a_{k-1}+) for k = 1..N.
  std::vector<double> branch_start_slopes;
};

struct ConditionCViolation {
  int k = 0;
  double x = 0.0;
};

struct ConditionCResult {
  double s = 0.0;
  bool pass = false;
  std::optional<ConditionCViolation> first_violation;
};

struct BetaResult {
  double beta = 0.0;
  int n_star = 0;
  int iterations = 0;
  bool converged = false;
};

enum class BetaType { expanding, indifferent, attracting, discontinuous_at_beta };
std::string to_string(BetaType t);

struct BetaClassification {
  BetaType type = BetaType::expanding;
  /// ψ_{N*}'(β-).
  double psi_deriv_left = 0.0;
  /// ψ_{N*+1}(β+) == 1, only evaluated when β < 1.
  std::optional<bool> next_branch_reaches_one;
  /// Which main-theorem hypothesis holds: "expanding-at-beta", "next-branch-full", or "none".
  std::string hypothesis;
};

struct MarkovResult {
  bool markov = true;
  std::optional<int> first_violating_branch;
  std::vector<int> violating_branches;
};

struct Identity32Result {
  bool pass = false;
  /// min over the grid of Σ_{i<=N*} (ψ_i(x) - a_{i-1}) - x.
  double min_slack = 0.0;
  /// |Σ_{i<=N*} (ψ_i(β) - a_{i-1}) - β|.
  double equality_gap = 0.0;
};

struct ValidationReport {
  Condition1Result cond1;
  std::vector<ConditionCResult> condC;
  BetaResult beta;
  BetaClassification beta_type;
  MarkovResult markov;
  Identity32Result identity_32;

  /// Hypotheses needed by the spectral pipeline at exponent s.
  bool hypotheses_hold(double s) const;
};

Condition1Result check_condition_1(const PiecewiseMap& T);
ConditionCResult check_condition_C(const PiecewiseMap& T, double s, int n_grid);
BetaResult find_beta(const PiecewiseMap& T);
/// `T_split` must carry a breakpoint at β (see PiecewiseMap::with_breakpoint).
BetaClassification classify_beta(const PiecewiseMap& T_split, double beta, int n_star);
MarkovResult check_markov(const PiecewiseMap& T);
Identity32Result check_identity_32(const PiecewiseMap& T_split, double beta, int n_star, int n_grid);

ValidationReport validate(const PiecewiseMap& T, const std::vector<double>& s_values, int n_grid = 4096);

}  // namespace pmaps
