#include <map>

#include "pmaps/map_model.hpp"

namespace pmaps {

namespace {

// Two branches with psi_1' + psi_2' = 1 and an indifferent fixed point at 1.
constexpr const char* kExample22 = R"json({
  "name": "example22",
  "breakpoints": ["0", "1/3", "1"],
  "branches": [
    {"expr": "(1/3)*(2+3*x-2*sqrt(1-3*x))", "inverse_expr": "(1-(sqrt(4-3*x)-1)^2)/3"},
    {"expr": "x-(3/4)*(1-x)^2", "inverse_expr": "1-(2/3)*(sqrt(4-3*x)-1)"}
  ]
})json";

// Non-Markov five-branch map; the last branch is fixed by sum psi_i' = 1.
constexpr const char* kExample24 = R"json({
  "name": "example24",
  "breakpoints": ["0", "1/4", "17/60", "2/5", "32/75", "1"],
  "branches": [
    {"expr": "(1/4)*(3-3*sqrt(1-4*x)+4*x)", "inverse_expr": "(1-((sqrt(25-16*x)-3)/2)^2)/4"},
    {"expr": "15*x-15/4", "inverse_expr": "(x+15/4)/15"},
    {"expr": "(15/2)*x-17/8", "inverse_expr": "(x+17/8)/(15/2)"},
    {"expr": "15*x-11/2", "inverse_expr": "(x+11/2)/15"},
    {"complement": true}
  ]
})json";

constexpr const char* kDoubling = R"json({
  "name": "doubling",
  "breakpoints": ["0", "1/2", "1"],
  "branches": [
    {"expr": "2*x", "inverse_expr": "x/2"},
    {"expr": "2*x-1", "inverse_expr": "(x+1)/2"}
  ]
})json";

// Convex full branches with T_k(a_{k-1}) = 0.
constexpr const char* kLyConvex = R"json({
  "name": "ly-convex",
  "breakpoints": ["0", "1/2", "1"],
  "branches": [
    {"expr": "(3/2)*x+x^2", "inverse_expr": "(-3/2+sqrt(9/4+4*x))/2"},
    {"expr": "(x-1/2)+2*(x-1/2)^2", "inverse_expr": "1/2+(-1+sqrt(1+8*x))/4"}
  ]
})json";

const std::map<std::string, const char*>& registry() {
  static const std::map<std::string, const char*> r{
      {"example22", kExample22}, {"example24", kExample24}, {"doubling", kDoubling}, {"ly-convex", kLyConvex}};
  return r;
}

}  // namespace

std::vector<std::string> builtin_map_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : registry()) names.push_back(name);
  return names;
}

std::optional<std::string> builtin_map_json(const std::string& name) {
  auto it = registry().find(name);
  if (it == registry().end()) return std::nullopt;
  return std::string(it->second);
}

}  // namespace pmaps
