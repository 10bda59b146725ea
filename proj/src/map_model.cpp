#include "pmaps/map_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace pmaps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMonotoneSamples = 10000;

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

// Bisection for the x in [a, b] with f(x) = target, f non-decreasing.
template <class F>
double bisect_increasing(const F& f, double target, double a, double b) {
  for (int it = 0; it < 200; ++it) {
    double m = a + 0.5 * (b - a);
    if (m <= a || m >= b) break;
    if (f(m) < target) a = m;
    else b = m;
  }
  return a + 0.5 * (b - a);
}

}  // namespace

double one_sided_limit(const std::function<double(double)>& f, double point, Side side) {
  const double dir = side == Side::left ? -1.0 : 1.0;
  double prev_v = std::numeric_limits<double>::quiet_NaN();
  double prev_r = std::numeric_limits<double>::quiet_NaN();
  double first_v = std::numeric_limits<double>::quiet_NaN();
  double last = std::numeric_limits<double>::quiet_NaN();
  bool increasing = true;
  for (int m = 20; m <= 40; ++m) {
    double v = f(point + dir * std::ldexp(1.0, -m));
    if (!std::isfinite(v)) return v;
    if (m == 20) first_v = v;
    if (m > 20) {
      if (std::abs(v) <= std::abs(prev_v)) increasing = false;
      double r = 2.0 * v - prev_v;
      if (m > 21 && std::abs(r - prev_r) < 1e-9 * std::max(1.0, std::abs(r))) return r;
      prev_r = r;
      last = r;
    }
    prev_v = v;
  }
  if (increasing && std::abs(prev_v) > 100.0 * std::max(1.0, std::abs(first_v)))
    return std::copysign(kInf, prev_v);
  return last;
}

// ---------------------------------------------------------------------------

Branch::Branch(double lo, double hi, std::shared_ptr<const BranchFunction> fn)
    : lo_(lo), hi_(hi), fn_(std::move(fn)) {
  image_lo_ = fn_->forward(lo_);
  image_hi_ = fn_->forward(hi_);
  // Rounding in closed forms can leave an image a few ulps outside [0,1].
  if (std::abs(image_lo_) < 1e-12) image_lo_ = 0.0;
  if (std::abs(image_hi_ - 1.0) < 1e-12) image_hi_ = 1.0;
}

double Branch::value(double y) const { return fn_->forward(std::clamp(y, lo_, hi_)); }

double Branch::deriv(double y, Side side) const {
  y = std::clamp(y, lo_, hi_);
  if (y <= lo_) side = Side::right;
  if (y >= hi_) side = Side::left;
  return fn_->forward_deriv(y, side);
}

double Branch::psi(double x) const {
  if (x <= image_lo_) return lo_;
  if (x >= image_hi_) return hi_;
  return std::clamp(fn_->inverse(x), lo_, hi_);
}

double Branch::psi_deriv(double x, Side side) const {
  if (x < image_lo_ || x > image_hi_ || image_lo_ >= image_hi_) return 0.0;
  double d;
  if (x == image_lo_) {
    if (side == Side::left) return 0.0;
    d = 1.0 / fn_->forward_deriv(lo_, Side::right);
  } else if (x == image_hi_) {
    if (side == Side::right) return 0.0;
    d = 1.0 / fn_->forward_deriv(hi_, Side::left);
  } else {
    d = fn_->inverse_deriv(x, side);
  }
  if (std::isnan(d) || d < 0.0) return 0.0;
  return d;
}

// ---------------------------------------------------------------------------

ExprBranchFunction::ExprBranchFunction(Expr forward, std::optional<Expr> inverse, double dom_lo,
                                       double dom_hi)
    : forward_(std::move(forward)), inverse_(std::move(inverse)), lo_(dom_lo), hi_(dom_hi) {
  f_ = CompiledExpr(forward_);
  df_ = CompiledExpr(differentiate(forward_));
  if (inverse_) {
    inv_ = CompiledExpr(*inverse_);
    dinv_ = CompiledExpr(differentiate(*inverse_));
  }
  auto f = [this](double y) { return f_(y); };
  auto df = [this](double y) { return df_(y); };
  value_lo_ = finite_or(f_(lo_), one_sided_limit(f, lo_, Side::right));
  value_hi_ = finite_or(f_(hi_), one_sided_limit(f, hi_, Side::left));
  deriv_lo_ = finite_or(df_(lo_), one_sided_limit(df, lo_, Side::right));
  deriv_hi_ = finite_or(df_(hi_), one_sided_limit(df, hi_, Side::left));
}

double ExprBranchFunction::forward(double y) const {
  if (y <= lo_) return value_lo_;
  if (y >= hi_) return value_hi_;
  double v = f_(y);
  if (!std::isfinite(v)) return (y - lo_ < hi_ - y) ? value_lo_ : value_hi_;
  return v;
}

double ExprBranchFunction::forward_deriv(double y, Side) const {
  if (y <= lo_) return deriv_lo_;
  if (y >= hi_) return deriv_hi_;
  double d = df_(y);
  if (std::isnan(d)) return (y - lo_ < hi_ - y) ? deriv_lo_ : deriv_hi_;
  return d;
}

double ExprBranchFunction::inverse(double x) const {
  if (inverse_) {
    double v = inv_(x);
    if (std::isfinite(v)) return std::clamp(v, lo_, hi_);
  }
  return bisect_increasing([this](double y) { return forward(y); }, x, lo_, hi_);
}

double ExprBranchFunction::inverse_deriv(double x, Side side) const {
  if (inverse_) {
    double d = dinv_(x);
    if (std::isfinite(d) && d >= 0.0) return d;
  }
  return 1.0 / forward_deriv(inverse(x), side);
}

// ---------------------------------------------------------------------------

TableBranchFunction::TableBranchFunction(std::vector<std::pair<double, double>> points) {
  xs_.reserve(points.size());
  ys_.reserve(points.size());
  for (auto [x, y] : points) {
    xs_.push_back(x);
    ys_.push_back(y);
  }
}

double TableBranchFunction::slope(std::size_t s) const {
  return (ys_[s + 1] - ys_[s]) / (xs_[s + 1] - xs_[s]);
}

namespace {

std::size_t segment_of(const std::vector<double>& knots, double v, Side side) {
  const std::size_t last = knots.size() - 2;
  auto it = side == Side::right ? std::upper_bound(knots.begin(), knots.end(), v)
                                : std::lower_bound(knots.begin(), knots.end(), v);
  std::ptrdiff_t idx = (it - knots.begin()) - 1;
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(last)));
}

}  // namespace

double TableBranchFunction::forward(double y) const {
  y = std::clamp(y, xs_.front(), xs_.back());
  std::size_t s = segment_of(xs_, y, Side::right);
  return ys_[s] + slope(s) * (y - xs_[s]);
}

double TableBranchFunction::forward_deriv(double y, Side side) const {
  return slope(segment_of(xs_, y, side));
}

double TableBranchFunction::inverse(double x) const {
  x = std::clamp(x, ys_.front(), ys_.back());
  std::size_t s = segment_of(ys_, x, Side::right);
  return xs_[s] + (x - ys_[s]) / slope(s);
}

double TableBranchFunction::inverse_deriv(double x, Side side) const {
  return 1.0 / slope(segment_of(ys_, x, side));
}

// ---------------------------------------------------------------------------

ComplementBranchFunction::ComplementBranchFunction(std::vector<Branch> preceding, double dom_lo)
    : preceding_(std::move(preceding)), lo_(dom_lo) {}

double ComplementBranchFunction::psi_unclamped(double x) const {
  double v = lo_ + x;
  for (const Branch& b : preceding_) v -= b.psi(x) - b.lo();
  return v;
}

double ComplementBranchFunction::inverse(double x) const {
  return std::clamp(psi_unclamped(x), lo_, 1.0);
}

double ComplementBranchFunction::inverse_deriv(double x, Side side) const {
  double d = 1.0;
  for (const Branch& b : preceding_) d -= b.psi_deriv(x, side);
  return d;
}

double ComplementBranchFunction::forward(double y) const {
  if (y <= psi_unclamped(0.0)) return 0.0;
  if (y >= psi_unclamped(1.0)) return 1.0;
  return bisect_increasing([this](double x) { return psi_unclamped(x); }, y, 0.0, 1.0);
}

double ComplementBranchFunction::forward_deriv(double y, Side side) const {
  double x = forward(y);
  if (x <= 0.0) side = Side::right;
  if (x >= 1.0) side = Side::left;
  return 1.0 / inverse_deriv(x, side);
}

// ---------------------------------------------------------------------------

PiecewiseMap::PiecewiseMap(std::string name, std::vector<double> breakpoints,
                           std::vector<Branch> branches, std::string source_json)
    : name_(std::move(name)),
      breakpoints_(std::move(breakpoints)),
      branches_(std::move(branches)),
      source_(std::move(source_json)) {}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string PiecewiseMap::content_hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(source_)));
  return buf;
}

int PiecewiseMap::branch_index(double x, Side side) const {
  const int n = size();
  if (side == Side::right) {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    int k = static_cast<int>(it - breakpoints_.begin());
    return std::clamp(k, 1, n);
  }
  auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
  int k = static_cast<int>(it - breakpoints_.begin());
  return std::clamp(k, 1, n);
}

double PiecewiseMap::apply(double x, Side side) const { return branch(branch_index(x, side)).value(x); }

double PiecewiseMap::derivative(double x, Side side) const {
  return branch(branch_index(x, side)).deriv(x, side);
}

double PiecewiseMap::inverse_branch(int k, double x) const { return branch(k).psi(x); }

double PiecewiseMap::inverse_branch_deriv(int k, double x, Side side) const {
  if (x <= 0.0) side = Side::right;
  if (x >= 1.0) side = Side::left;
  return branch(k).psi_deriv(x, side);
}

std::pair<double, double> PiecewiseMap::branch_image(int k) const {
  const Branch& b = branch(k);
  return {b.image_lo(), b.image_hi()};
}

std::pair<PiecewiseMap, int> PiecewiseMap::with_breakpoint(double x) const {
  constexpr double kTol = 1e-12;
  for (int i = 0; i <= size(); ++i)
    if (std::abs(breakpoints_[static_cast<std::size_t>(i)] - x) <= kTol) return {*this, std::max(i, 1)};
  int k = branch_index(x, Side::right);
  std::vector<double> bps = breakpoints_;
  bps.insert(bps.begin() + k, x);
  std::vector<Branch> brs;
  for (int i = 1; i <= size(); ++i) {
    const Branch& b = branch(i);
    if (i == k) {
      brs.emplace_back(b.lo(), x, b.function_ptr());
      brs.emplace_back(x, b.hi(), b.function_ptr());
    } else {
      brs.push_back(b);
    }
  }
  return {PiecewiseMap(name_, std::move(bps), std::move(brs), source_), k};
}

// ---------------------------------------------------------------------------
// Loading

namespace {

using nlohmann::json;

double breakpoint_value(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const ParseError& e) {
      throw SchemaError(std::string("bad breakpoint: ") + e.what());
    }
  }
  throw SchemaError("breakpoints must be rational strings or numbers");
}

Expr branch_expr(const json& v, int k, const char* field) {
  if (!v.is_string()) throw SchemaError("branch " + std::to_string(k) + ": '" + field + "' must be a string");
  try {
    return parse_expr(v.get<std::string>());
  } catch (const ParseError& e) {
    throw SchemaError("branch " + std::to_string(k) + " " + field + ": " + e.what());
  }
}

void check_expr_branch(const Expr& e, int k, double lo, double hi) {
  double prev = 0.0;
  for (int i = 0; i < kMonotoneSamples; ++i) {
    double x = lo + (hi - lo) * i / kMonotoneSamples;
    double v;
    try {
      v = e.eval(x);
    } catch (const DomainError& err) {
      throw SchemaError("branch " + std::to_string(k) + " undefined at x=" + std::to_string(x) + ": " +
                        err.what());
    }
    if (!std::isfinite(v)) throw SchemaError("branch " + std::to_string(k) + " not finite at x=" + std::to_string(x));
    if (i > 0 && !(v > prev)) throw MonotonicityError(k, x);
    prev = v;
  }
}

void check_image(const Branch& b, int k) {
  constexpr double kTol = 1e-12;
  if (!(b.image_lo() >= -kTol && b.image_hi() <= 1.0 + kTol && b.image_lo() <= b.image_hi()))
    throw SchemaError("branch " + std::to_string(k) + " image [" + std::to_string(b.image_lo()) + ", " +
                      std::to_string(b.image_hi()) + "] leaves [0,1]");
}

void check_inverse(const Branch& b, int k) {
  const double lo = b.image_lo(), hi = b.image_hi();
  for (int i = 1; i < 100; ++i) {
    double x = lo + (hi - lo) * i / 100.0;
    double y = b.function().inverse(x);
    if (!(std::abs(b.value(y) - x) <= 1e-10))
      throw SchemaError("branch " + std::to_string(k) + ": inverse_expr does not invert expr at x=" +
                        std::to_string(x));
  }
}

void check_complement(const ComplementBranchFunction& fn, int k, double lo) {
  double prev = fn.psi_unclamped(0.0);
  if (prev < lo - 1e-12) throw SchemaError("complement branch starts below its domain");
  for (int i = 1; i <= kMonotoneSamples; ++i) {
    double x = static_cast<double>(i) / kMonotoneSamples;
    double v = fn.psi_unclamped(x);
    if (v < prev - 1e-14) throw MonotonicityError(k, x);
    prev = v;
  }
  if (std::abs(fn.psi_unclamped(1.0) - 1.0) > 1e-9)
    throw SchemaError("complement branch does not reach 1: the other branches' inverse derivatives "
                      "do not integrate to the complement domain");
}

}  // namespace

PiecewiseMap map_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("map file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("map file must be a JSON object");
  if (!j.contains("breakpoints") || !j["breakpoints"].is_array())
    throw SchemaError("map file needs a 'breakpoints' array");
  if (!j.contains("branches") || !j["branches"].is_array())
    throw SchemaError("map file needs a 'branches' array");
  std::string name = j.value("name", std::string("unnamed"));

  std::vector<double> bps;
  for (const auto& v : j["breakpoints"]) bps.push_back(breakpoint_value(v));
  if (bps.size() < 2) throw BreakpointError("at least two breakpoints are required");
  if (bps.front() != 0.0 || bps.back() != 1.0) throw BreakpointError("breakpoints must start at 0 and end at 1");
  for (std::size_t i = 1; i < bps.size(); ++i)
    if (!(bps[i] > bps[i - 1])) throw BreakpointError("breakpoints must be strictly increasing");

  const auto& jb = j["branches"];
  if (jb.size() != bps.size() - 1)
    throw BreakpointError("expected " + std::to_string(bps.size() - 1) + " branches, got " +
                          std::to_string(jb.size()));

  std::vector<Branch> branches;
  for (std::size_t i = 0; i < jb.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    const double lo = bps[i], hi = bps[i + 1];
    const json& b = jb[i];
    if (!b.is_object()) throw SchemaError("branch " + std::to_string(k) + " must be an object");
    std::shared_ptr<const BranchFunction> fn;
    bool has_inverse = false;
    if (b.contains("expr")) {
      Expr fwd = branch_expr(b["expr"], k, "expr");
      std::optional<Expr> inv;
      if (b.contains("inverse_expr") && !b["inverse_expr"].is_null()) {
        inv = branch_expr(b["inverse_expr"], k, "inverse_expr");
        has_inverse = true;
      }
      check_expr_branch(fwd, k, lo, hi);
      fn = std::make_shared<ExprBranchFunction>(fwd, inv, lo, hi);
    } else if (b.contains("table")) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& p : b["table"]) {
        if (!p.is_array() || p.size() != 2) throw SchemaError("table entries must be [x, y] pairs");
        pts.emplace_back(p[0].get<double>(), p[1].get<double>());
      }
      if (pts.size() < 2) throw SchemaError("branch " + std::to_string(k) + ": table needs two points");
      if (std::abs(pts.front().first - lo) > 1e-12 || std::abs(pts.back().first - hi) > 1e-12)
        throw BreakpointError("branch " + std::to_string(k) + ": table does not span its breakpoints");
      for (std::size_t m = 1; m < pts.size(); ++m) {
        if (!(pts[m].first > pts[m - 1].first)) throw SchemaError("table x values must increase");
        if (!(pts[m].second > pts[m - 1].second)) throw MonotonicityError(k, pts[m].first);
      }
      pts.front().first = lo;
      pts.back().first = hi;
      fn = std::make_shared<TableBranchFunction>(std::move(pts));
    } else if (b.value("complement", false)) {
      if (k != static_cast<int>(jb.size()))
        throw SchemaError("only the last branch may be a complement branch");
      auto comp = std::make_shared<ComplementBranchFunction>(branches, lo);
      check_complement(*comp, k, lo);
      fn = comp;
    } else {
      throw SchemaError("branch " + std::to_string(k) + " needs 'expr', 'table' or 'complement'");
    }
    Branch br(lo, hi, fn);
    check_image(br, k);
    if (has_inverse) check_inverse(br, k);
    branches.push_back(std::move(br));
  }
  return PiecewiseMap(std::move(name), std::move(bps), std::move(branches), j.dump());
}

PiecewiseMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return map_from_json_text(ss.str());
}

PiecewiseMap builtin_map(const std::string& name) {
  auto text = builtin_map_json(name);
  if (!text) throw SchemaError("unknown built-in map '" + name + "'");
  return map_from_json_text(*text);
}

PiecewiseMap resolve_map(const std::string& name_or_path) {
  if (builtin_map_json(name_or_path)) return builtin_map(name_or_path);
  return load_map(name_or_path);
}

}  // namespace pmaps
