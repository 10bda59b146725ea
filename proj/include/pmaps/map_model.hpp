#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pmaps/expr.hpp"

namespace pmaps {

/// Which one-sided limit to take at a point where a quantity jumps.
enum class Side { left, right };

class SchemaError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class BreakpointError : public SchemaError {
public:
  using SchemaError::SchemaError;
};

class MonotonicityError : public SchemaError {
public:
  MonotonicityError(int branch, double x)
      : SchemaError("branch " + std::to_string(branch) + " is not strictly increasing near x=" +
                    std::to_string(x)),
        branch_(branch),
        x_(x) {}
  int branch() const noexcept { return branch_; }
  double x() const noexcept { return x_; }

private:
  int branch_;
  double x_;
};

/// Limit of f at `point` approached from `side` along point -+ 2^-m, m = 20..40,
/// with Richardson extrapolation. Returns +-inf when the sequence diverges.
double one_sided_limit(const std::function<double(double)>& f, double point, Side side);

/// A strictly increasing function on [dom_lo, dom_hi] together with its inverse.
/// At dom_hi, forward() and forward_deriv() return left limits.
class BranchFunction {
public:
  virtual ~BranchFunction() = default;
  virtual double forward(double y) const = 0;
  virtual double forward_deriv(double y, Side side) const = 0;
  // x lies inside the image of the function's own domain.
  virtual double inverse(double x) const = 0;
  virtual double inverse_deriv(double x, Side side) const = 0;
  virtual std::string kind() const = 0;
};

/// T_k restricted to [lo, hi) with its extended inverse psi_k: [0,1] -> [lo, hi].
class Branch {
public:
  Branch(double lo, double hi, std::shared_ptr<const BranchFunction> fn);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double image_lo() const noexcept { return image_lo_; }
  double image_hi() const noexcept { return image_hi_; }
  const BranchFunction& function() const noexcept { return *fn_; }
  std::shared_ptr<const BranchFunction> function_ptr() const noexcept { return fn_; }

  /// T_k(y) for y in [lo, hi]; at hi this is the left limit.
  double value(double y) const;
  double deriv(double y, Side side) const;
  /// Three-case extended inverse.
  double psi(double x) const;
  /// psi_k'(x); zero outside the closed image, one-sided at its endpoints.
  double psi_deriv(double x, Side side) const;

private:
  double lo_, hi_;
  std::shared_ptr<const BranchFunction> fn_;
  double image_lo_, image_hi_;
};

/// Closed-form branch with an optional closed-form inverse.
class ExprBranchFunction final : public BranchFunction {
public:
  ExprBranchFunction(Expr forward, std::optional<Expr> inverse, double dom_lo, double dom_hi);

  double forward(double y) const override;
  double forward_deriv(double y, Side side) const override;
  double inverse(double x) const override;
  double inverse_deriv(double x, Side side) const override;
  std::string kind() const override { return "expr"; }

  const Expr& expression() const noexcept { return forward_; }
  const std::optional<Expr>& inverse_expression() const noexcept { return inverse_; }

private:
  Expr forward_;
  std::optional<Expr> inverse_;
  CompiledExpr f_, df_, inv_, dinv_;
  double lo_, hi_;
  double value_lo_, value_hi_;
  double deriv_lo_, deriv_hi_;
};

/// Forward map given by samples (x_i, y_i), interpolated linearly.
class TableBranchFunction final : public BranchFunction {
public:
  explicit TableBranchFunction(std::vector<std::pair<double, double>> points);

  double forward(double y) const override;
  double forward_deriv(double y, Side side) const override;
  double inverse(double x) const override;
  double inverse_deriv(double x, Side side) const override;
  std::string kind() const override { return "table"; }

private:
  double slope(std::size_t segment) const;
  std::vector<double> xs_, ys_;
};

/// Last branch defined implicitly by requiring the inverse-branch derivatives
/// to sum to one: psi_N(x) = a_{N-1} + x - sum_{i<N} (psi_i(x) - a_{i-1}).
class ComplementBranchFunction final : public BranchFunction {
public:
  ComplementBranchFunction(std::vector<Branch> preceding, double dom_lo);

  double forward(double y) const override;
  double forward_deriv(double y, Side side) const override;
  double inverse(double x) const override;
  double inverse_deriv(double x, Side side) const override;
  std::string kind() const override { return "complement"; }

  double psi_unclamped(double x) const;

private:
  std::vector<Branch> preceding_;
  double lo_;
};

/// Piecewise monotone, orientation-preserving map of [0,1].
/// Branches are numbered 1..N in the public interface.
class PiecewiseMap {
public:
  PiecewiseMap(std::string name, std::vector<double> breakpoints, std::vector<Branch> branches,
               std::string source_json);

  const std::string& name() const noexcept { return name_; }
  int size() const noexcept { return static_cast<int>(branches_.size()); }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const Branch& branch(int k) const { return branches_.at(static_cast<std::size_t>(k - 1)); }
  const std::vector<Branch>& branches() const noexcept { return branches_; }

  /// Canonical JSON the map was loaded from.
  const std::string& source_json() const noexcept { return source_; }
  /// FNV-1a 64-bit hash of source_json(), as 16 hex digits.
  std::string content_hash() const;

  /// Branch number containing x: right side uses [a_{k-1}, a_k), left side (a_{k-1}, a_k].
  int branch_index(double x, Side side = Side::right) const;

  double apply(double x, Side side = Side::right) const;
  /// T'(x), one-sided at breakpoints; +inf where a branch slope is unbounded.
  double derivative(double x, Side side = Side::right) const;

  double inverse_branch(int k, double x) const;
  /// psi_k'(x). At x=0 the right limit and at x=1 the left limit is used regardless of side.
  double inverse_branch_deriv(int k, double x, Side side = Side::right) const;
  std::pair<double, double> branch_image(int k) const;

  /// Copy with an extra breakpoint at x (the branch containing x is split in two).
  /// Returns the copy and the number of the branch ending at x. If x already is a
  /// breakpoint (within 1e-12) the copy is unchanged.
  std::pair<PiecewiseMap, int> with_breakpoint(double x) const;

private:
  std::string name_;
  std::vector<double> breakpoints_;
  std::vector<Branch> branches_;
  std::string source_;
};

PiecewiseMap map_from_json_text(const std::string& text);
PiecewiseMap load_map(const std::filesystem::path& path);

/// Names accepted by builtin_map().
std::vector<std::string> builtin_map_names();
std::optional<std::string> builtin_map_json(const std::string& name);
PiecewiseMap builtin_map(const std::string& name);
/// Built-in name if it is one, otherwise a file path.
PiecewiseMap resolve_map(const std::string& name_or_path);

std::uint64_t fnv1a64(const std::string& data);

}  // namespace pmaps
