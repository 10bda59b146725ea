#include "pmaps/aconvex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pmaps {

namespace {

constexpr double kMonotoneSlack = 1e-10;
constexpr double kIndifferenceTol = 1e-9;
constexpr double kMarkovTol = 1e-10;

}  // namespace

std::string to_string(BetaType t) {
  switch (t) {
    case BetaType::expanding: return "expanding";
    case BetaType::indifferent: return "indifferent";
    case BetaType::attracting: return "attracting";
    case BetaType::discontinuous_at_beta: return "discontinuous-at-beta";
  }
  return "unknown";
}

Condition1Result check_condition_1(const PiecewiseMap& T) {
  Condition1Result r;
  r.t_prime_0 = T.derivative(0.0, Side::right);
  bool slopes_ok = true;
  for (int k = 1; k <= T.size(); ++k) {
    const Branch& b = T.branch(k);
    double d = b.deriv(b.lo(), Side::right);
    r.branch_start_slopes.push_back(d);
    if (!(d > 0.0)) slopes_ok = false;
  }
  r.pass = r.t_prime_0 > 1.0 && slopes_ok;
  return r;
}

ConditionCResult check_condition_C(const PiecewiseMap& T, double s, int n_grid) {
  ConditionCResult r;
  r.s = s;
  r.pass = true;
  const int N = T.size();
  std::vector<double> prev(static_cast<std::size_t>(N)), cur(static_cast<std::size_t>(N));
  for (int j = 0; j <= n_grid; ++j) {
    const double x = static_cast<double>(j) / n_grid;
    double acc = 0.0;
    for (int k = 1; k <= N; ++k) {
      double d = T.inverse_branch_deriv(k, x, Side::right);
      acc += d > 0.0 ? std::pow(d, s) : 0.0;
      cur[static_cast<std::size_t>(k - 1)] = acc;
    }
    if (j > 0) {
      for (int k = 1; k <= N; ++k) {
        if (cur[static_cast<std::size_t>(k - 1)] > prev[static_cast<std::size_t>(k - 1)] + kMonotoneSlack) {
          r.pass = false;
          r.first_violation = ConditionCViolation{k, x};
          return r;
        }
      }
    }
    std::swap(prev, cur);
  }
  return r;
}

namespace {

// sup of T over [0, b], using left limits at the right ends of branches.
double sup_on_prefix(const PiecewiseMap& T, double b) {
  double sup = 0.0;
  for (int k = 1; k <= T.size(); ++k) {
    const Branch& br = T.branch(k);
    if (br.lo() > b) break;
    sup = std::max(sup, b >= br.hi() ? br.image_hi() : br.value(b));
  }
  return std::min(sup, 1.0);
}

}  // namespace

BetaResult find_beta(const PiecewiseMap& T) {
  BetaResult r;
  double b = T.breakpoints()[1];
  for (int it = 0; it < 10000; ++it) {
    double nb = std::max(b, sup_on_prefix(T, b));
    if (std::abs(nb - b) <= 1e-12) {
      r.converged = true;
      break;
    }
    b = nb;
    ++r.iterations;
  }
  r.beta = b;
  r.n_star = T.with_breakpoint(b).second;
  return r;
}

BetaClassification classify_beta(const PiecewiseMap& Ts, double beta, int n_star) {
  BetaClassification c;
  const Branch& br = Ts.branch(n_star);
  c.psi_deriv_left = Ts.inverse_branch_deriv(n_star, beta, Side::left);
  const bool fixed = std::abs(br.image_hi() - beta) <= kIndifferenceTol;
  if (!fixed) c.type = BetaType::discontinuous_at_beta;
  else if (std::abs(c.psi_deriv_left - 1.0) <= kIndifferenceTol) c.type = BetaType::indifferent;
  else if (c.psi_deriv_left < 1.0) c.type = BetaType::expanding;
  else c.type = BetaType::attracting;
  if (beta < 1.0 && n_star < Ts.size())
    c.next_branch_reaches_one = std::abs(Ts.inverse_branch(n_star + 1, beta) - 1.0) <= kIndifferenceTol;
  if (c.psi_deriv_left < 1.0 - kIndifferenceTol) c.hypothesis = "expanding-at-beta";
  else if (beta >= 1.0) c.hypothesis = "beta-equals-one";
  else if (c.next_branch_reaches_one.value_or(false)) c.hypothesis = "next-branch-full";
  else c.hypothesis = "none";
  return c;
}

MarkovResult check_markov(const PiecewiseMap& T) {
  MarkovResult r;
  const auto& a = T.breakpoints();
  for (int j = 1; j <= T.size(); ++j) {
    auto [ilo, ihi] = T.branch_image(j);
    bool ok = true;
    for (std::size_t i = 1; i < a.size(); ++i) {
      double overlap = std::min(ihi, a[i]) - std::max(ilo, a[i - 1]);
      if (overlap <= kMarkovTol) continue;
      if (a[i - 1] < ilo - kMarkovTol || a[i] > ihi + kMarkovTol) ok = false;
    }
    if (!ok) {
      r.markov = false;
      if (!r.first_violating_branch) r.first_violating_branch = j;
      r.violating_branches.push_back(j);
    }
  }
  return r;
}

Identity32Result check_identity_32(const PiecewiseMap& Ts, double beta, int n_star, int n_grid) {
  Identity32Result r;
  auto lhs = [&](double x) {
    double acc = 0.0;
    for (int i = 1; i <= n_star; ++i) acc += Ts.inverse_branch(i, x) - Ts.branch(i).lo();
    return acc;
  };
  r.min_slack = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= n_grid; ++j) {
    double x = beta * j / n_grid;
    r.min_slack = std::min(r.min_slack, lhs(x) - x);
  }
  r.equality_gap = std::abs(lhs(beta) - beta);
  r.pass = r.min_slack >= -1e-9 && r.equality_gap <= 1e-8;
  return r;
}

bool ValidationReport::hypotheses_hold(double s) const {
  if (!cond1.pass || !identity_32.pass) return false;
  for (const auto& c : condC)
    if (std::abs(c.s - s) < 1e-12) return c.pass;
  return false;
}

ValidationReport validate(const PiecewiseMap& T, const std::vector<double>& s_values, int n_grid) {
  ValidationReport v;
  v.cond1 = check_condition_1(T);
  for (double s : s_values) v.condC.push_back(check_condition_C(T, s, n_grid));
  v.beta = find_beta(T);
  auto [Ts, n_star] = T.with_breakpoint(v.beta.beta);
  v.beta_type = classify_beta(Ts, v.beta.beta, n_star);
  v.markov = check_markov(T);
  v.identity_32 = check_identity_32(Ts, v.beta.beta, n_star, n_grid);
  return v;
}

}  // namespace pmaps
