#include "pmaps/report.hpp"

namespace pmaps {

using nlohmann::json;

namespace {

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

json to_json(const ValidationReport& v) {
  json condC = json::array();
  for (const auto& c : v.condC) {
    json viol = nullptr;
    if (c.first_violation) viol = {{"k", c.first_violation->k}, {"x", c.first_violation->x}};
    condC.push_back({{"s", c.s}, {"pass", c.pass}, {"first_violation", viol}});
  }
  return {
      {"cond1",
       {{"pass", v.cond1.pass},
        {"t_prime_0", v.cond1.t_prime_0},
        {"branch_start_slopes", v.cond1.branch_start_slopes}}},
      {"condC", condC},
      {"beta", v.beta.beta},
      {"n_star", v.beta.n_star},
      {"beta_type",
       {{"type", to_string(v.beta_type.type)},
        {"psi_deriv_left", v.beta_type.psi_deriv_left},
        {"next_branch_reaches_one", optional_json(v.beta_type.next_branch_reaches_one)},
        {"hypothesis", v.beta_type.hypothesis}}},
      {"markov",
       {{"value", v.markov.markov},
        {"first_violating_branch", optional_json(v.markov.first_violating_branch)},
        {"violating_branches", v.markov.violating_branches}}},
      {"identity_32",
       {{"pass", v.identity_32.pass},
        {"min_slack", v.identity_32.min_slack},
        {"equality_gap", v.identity_32.equality_gap}}},
  };
}

json to_json(const SpectralResult& s, bool include_vectors) {
  json support = json::array();
  for (auto [a, b] : s.support_estimate) support.push_back({a, b});
  json j = {
      {"gamma", s.gamma},
      {"pressure", std::log(s.gamma)},
      {"residual_left", s.residual_left},
      {"residual_right", s.residual_right},
      {"iterations_left", s.iterations_left},
      {"iterations_right", s.iterations_right},
      {"converged", s.converged},
      {"cesaro_engaged", s.cesaro_engaged},
      {"peripheral_count", s.peripheral_count},
      {"support_estimate", support},
      {"ms_near_atomic", s.ms_near_atomic},
  };
  if (include_vectors) {
    j["ms_weights"] = s.ms_weights;
    j["density"] = s.density.values();
  }
  return j;
}

json to_json(const ConditionBResult& b) {
  return {{"m_hat", b.m_hat},
          {"cylinder_counts", b.cylinder_counts},
          {"per_cylinder", b.per_cylinder},
          {"strictly_decreasing", b.strictly_decreasing},
          {"warnings", b.warnings}};
}

json to_json(const ParabolicScaling& p) {
  return {{"w", p.w},
          {"D", p.D},
          {"theta_hat", p.theta_hat},
          {"polynomial", p.polynomial},
          {"strictly_increasing", p.strictly_increasing},
          {"truncated", p.truncated}};
}

json verdict_json(const PressureCurve& c) {
  return {{"nonincreasing", optional_json(c.nonincreasing)},
          {"convex", optional_json(c.convex)},
          {"P1_zero", optional_json(c.p1_zero)}};
}

json to_json(const PressureCurve& c) {
  json pts = json::array();
  for (const auto& p : c.points)
    pts.push_back({{"s", p.s},
                   {"gamma", p.gamma},
                   {"P", p.P},
                   {"lambda", p.lambda},
                   {"h", p.h},
                   {"converged", p.converged},
                   {"ms_near_atomic", p.ms_near_atomic}});
  return {{"points", pts}, {"verdict", verdict_json(c)}};
}

json to_json(const LasotaYorkeResult& r) {
  return {{"alpha", r.alpha}, {"b_hat", r.b_hat}, {"pass", r.pass}, {"samples", r.samples}, {"seed", r.seed}};
}

}  // namespace pmaps
