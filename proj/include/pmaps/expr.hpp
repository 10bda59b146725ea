#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pmaps {

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class DomainError : public std::runtime_error {
public:
  DomainError(const std::string& what, std::string subexpr)
      : std::runtime_error(what + " in '" + subexpr + "'"), subexpr_(std::move(subexpr)) {}
  const std::string& subexpression() const noexcept { return subexpr_; }

private:
  std::string subexpr_;
};

/// Immutable expression tree in one variable `x`.
///
/// Nodes are shared between trees, so copying an Expr is cheap and derivative
/// trees reuse the subtrees of the original. Construction through the static
/// helpers folds constant subexpressions and drops trivial identities
/// (0+a, 1*a, a^1, ...); nothing beyond that is simplified.
class Expr {
public:
  enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sqrt, Log };

  Expr();  // the constant 0

  static Expr constant(double value);
  static Expr variable();
  static Expr neg(const Expr& a);
  static Expr add(const Expr& a, const Expr& b);
  static Expr sub(const Expr& a, const Expr& b);
  static Expr mul(const Expr& a, const Expr& b);
  static Expr div(const Expr& a, const Expr& b);
  static Expr pow(const Expr& a, const Expr& b);
  static Expr sqrt(const Expr& a);
  // Natural log. Not reachable from the parser; only produced by derivatives of u^v.
  static Expr log(const Expr& a);

  Op op() const noexcept;
  bool is_constant() const noexcept { return op() == Op::Const; }
  double constant_value() const noexcept;
  Expr lhs() const;
  Expr rhs() const;

  /// Evaluates at x. Throws DomainError naming the offending subexpression for
  /// a negative radicand, a zero divisor, a non-integer power of a negative
  /// base or a non-positive logarithm argument.
  double eval(double x) const;

  /// IEEE evaluation: domain violations yield NaN or +-inf instead of throwing.
  double eval_ieee(double x) const noexcept;

  /// Infix rendering that parses back to an expression with identical values.
  std::string str() const;

  std::size_t node_count() const;

private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Expr make(Op op, double value, const Expr* a, const Expr* b);

  std::shared_ptr<const Node> node_;

  friend class CompiledExpr;
};

/// Parses standard infix: + - * / with the usual precedence, right-associative
/// ^, unary minus, parentheses, `x`, and `sqrt(e)`. Literals are decimals with
/// an optional exponent; `p/q` folds to the correctly rounded quotient.
Expr parse_expr(std::string_view text);

/// Symbolic derivative with respect to x.
Expr differentiate(const Expr& e);

/// Parses an exact rational "p/q", an integer, or a decimal into the nearest double.
double parse_rational(std::string_view text);

/// Flattened postfix program for fast repeated IEEE evaluation.
class CompiledExpr {
public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& e);
  double operator()(double x) const noexcept;

private:
  struct Instr {
    Expr::Op op;
    double value;
  };
  std::vector<Instr> code_;
  std::size_t max_stack_ = 0;
};

}  // namespace pmaps
