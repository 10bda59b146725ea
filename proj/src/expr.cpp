#include "pmaps/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

namespace pmaps {

struct Expr::Node {
  Op op = Op::Const;
  double value = 0.0;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

namespace {

bool is_const(const Expr& e, double v) { return e.is_constant() && e.constant_value() == v; }

bool is_integer(double v) { return std::isfinite(v) && v == std::nearbyint(v); }

int precedence(Expr::Op op) {
  switch (op) {
    case Expr::Op::Add:
    case Expr::Op::Sub:
      return 1;
    case Expr::Op::Mul:
    case Expr::Op::Div:
      return 2;
    case Expr::Op::Neg:
      return 3;
    case Expr::Op::Pow:
      return 4;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  std::string s(buf.data());
  if (v < 0) return "(" + s + ")";
  return s;
}

double apply_binary(Expr::Op op, double a, double b) {
  switch (op) {
    case Expr::Op::Add: return a + b;
    case Expr::Op::Sub: return a - b;
    case Expr::Op::Mul: return a * b;
    case Expr::Op::Div: return a / b;
    case Expr::Op::Pow: return std::pow(a, b);
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

Expr::Expr() : node_(std::make_shared<Node>()) {}

Expr Expr::make(Op op, double value, const Expr* a, const Expr* b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->value = value;
  if (a) n->a = a->node_;
  if (b) n->b = b->node_;
  return Expr(std::move(n));
}

Expr Expr::constant(double value) { return make(Op::Const, value, nullptr, nullptr); }
Expr Expr::variable() { return make(Op::Var, 0.0, nullptr, nullptr); }

Expr Expr::neg(const Expr& a) {
  if (a.is_constant()) return constant(-a.constant_value());
  if (a.op() == Op::Neg) return a.lhs();
  return make(Op::Neg, 0.0, &a, nullptr);
}

Expr Expr::add(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return constant(a.constant_value() + b.constant_value());
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return make(Op::Add, 0.0, &a, &b);
}

Expr Expr::sub(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return constant(a.constant_value() - b.constant_value());
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return neg(b);
  return make(Op::Sub, 0.0, &a, &b);
}

Expr Expr::mul(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return constant(a.constant_value() * b.constant_value());
  if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_const(a, -1.0)) return neg(b);
  if (is_const(b, -1.0)) return neg(a);
  return make(Op::Mul, 0.0, &a, &b);
}

Expr Expr::div(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.constant_value() != 0.0)
    return constant(a.constant_value() / b.constant_value());
  if (is_const(b, 1.0)) return a;
  if (is_const(a, 0.0) && b.is_constant() && b.constant_value() != 0.0) return constant(0.0);
  return make(Op::Div, 0.0, &a, &b);
}

Expr Expr::pow(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    double v = std::pow(a.constant_value(), b.constant_value());
    if (std::isfinite(v)) return constant(v);
  }
  if (is_const(b, 1.0)) return a;
  if (is_const(b, 0.0)) return constant(1.0);
  return make(Op::Pow, 0.0, &a, &b);
}

Expr Expr::sqrt(const Expr& a) {
  if (a.is_constant() && a.constant_value() >= 0.0) return constant(std::sqrt(a.constant_value()));
  return make(Op::Sqrt, 0.0, &a, nullptr);
}

Expr Expr::log(const Expr& a) {
  if (a.is_constant() && a.constant_value() > 0.0) return constant(std::log(a.constant_value()));
  return make(Op::Log, 0.0, &a, nullptr);
}

Expr::Op Expr::op() const noexcept { return node_->op; }
double Expr::constant_value() const noexcept { return node_->value; }
Expr Expr::lhs() const { return Expr(node_->a); }
Expr Expr::rhs() const { return Expr(node_->b); }

double Expr::eval(double x) const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return x;
    case Op::Neg: return -lhs().eval(x);
    case Op::Add:
    case Op::Sub:
    case Op::Mul: return apply_binary(n.op, lhs().eval(x), rhs().eval(x));
    case Op::Div: {
      double num = lhs().eval(x);
      double den = rhs().eval(x);
      if (den == 0.0) throw DomainError("division by zero", str());
      return num / den;
    }
    case Op::Pow: {
      double base = lhs().eval(x);
      double ex = rhs().eval(x);
      if (base < 0.0 && !is_integer(ex)) throw DomainError("non-integer power of a negative base", str());
      if (base == 0.0 && ex < 0.0) throw DomainError("negative power of zero", str());
      return std::pow(base, ex);
    }
    case Op::Sqrt: {
      double v = lhs().eval(x);
      if (v < 0.0) throw DomainError("square root of a negative number", str());
      return std::sqrt(v);
    }
    case Op::Log: {
      double v = lhs().eval(x);
      if (v <= 0.0) throw DomainError("logarithm of a non-positive number", str());
      return std::log(v);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double Expr::eval_ieee(double x) const noexcept {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return x;
    case Op::Neg: return -lhs().eval_ieee(x);
    case Op::Sqrt: return std::sqrt(lhs().eval_ieee(x));
    case Op::Log: return std::log(lhs().eval_ieee(x));
    default: return apply_binary(n.op, lhs().eval_ieee(x), rhs().eval_ieee(x));
  }
}

std::string Expr::str() const {
  const Node& n = *node_;
  auto wrap = [&](const Expr& child, bool right_side) {
    std::string s = child.str();
    int pc = precedence(child.op());
    int p = precedence(n.op);
    bool need = pc < p || (pc == p && right_side && n.op != Op::Pow) || (pc == p && !right_side && n.op == Op::Pow);
    return need ? "(" + s + ")" : s;
  };
  switch (n.op) {
    case Op::Const: return format_number(n.value);
    case Op::Var: return "x";
    case Op::Neg: return "-" + wrap(lhs(), true);
    case Op::Sqrt: return "sqrt(" + lhs().str() + ")";
    case Op::Log: return "log(" + lhs().str() + ")";
    case Op::Add: return wrap(lhs(), false) + " + " + wrap(rhs(), true);
    case Op::Sub: return wrap(lhs(), false) + " - " + wrap(rhs(), true);
    case Op::Mul: return wrap(lhs(), false) + "*" + wrap(rhs(), true);
    case Op::Div: return wrap(lhs(), false) + "/" + wrap(rhs(), true);
    case Op::Pow: return wrap(lhs(), false) + "^" + wrap(rhs(), true);
  }
  return "?";
}

std::size_t Expr::node_count() const {
  std::size_t c = 1;
  if (node_->a) c += lhs().node_count();
  if (node_->b) c += rhs().node_count();
  return c;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr e = parse_product();
    for (;;) {
      if (accept('+')) e = Expr::add(e, parse_product());
      else if (accept('-')) e = Expr::sub(e, parse_product());
      else return e;
    }
  }

  Expr parse_product() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*')) e = Expr::mul(e, parse_unary());
      else if (accept('/')) e = Expr::div(e, parse_unary());
      else return e;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::neg(parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return Expr::pow(base, parse_unary());
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string_view id = text_.substr(start, pos_ - start);
      if (id == "x") return Expr::variable();
      if (id == "sqrt") {
        if (!accept('(')) fail("expected '(' after sqrt");
        Expr e = parse_sum();
        if (!accept(')')) fail("expected ')'");
        return Expr::sqrt(e);
      }
      pos_ = start;
      fail("unknown identifier '" + std::string(id) + "'");
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    double v = 0.0;
    auto first = text_.data() + pos_;
    auto last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return Expr::constant(v);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

double parse_rational(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  auto parse_part = [&](std::string_view s, std::size_t offset) {
    s = trim(s);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::general);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
      throw ParseError("malformed rational '" + std::string(text) + "'", offset);
    return v;
  };
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_part(text, 0);
  double p = parse_part(text.substr(0, slash), 0);
  double q = parse_part(text.substr(slash + 1), slash + 1);
  if (q == 0.0) throw ParseError("zero denominator in '" + std::string(text) + "'", slash + 1);
  return p / q;
}

// ---------------------------------------------------------------------------
// Derivative

Expr differentiate(const Expr& e) {
  using Op = Expr::Op;
  switch (e.op()) {
    case Op::Const: return Expr::constant(0.0);
    case Op::Var: return Expr::constant(1.0);
    case Op::Neg: return Expr::neg(differentiate(e.lhs()));
    case Op::Add: return Expr::add(differentiate(e.lhs()), differentiate(e.rhs()));
    case Op::Sub: return Expr::sub(differentiate(e.lhs()), differentiate(e.rhs()));
    case Op::Mul: {
      Expr u = e.lhs(), v = e.rhs();
      return Expr::add(Expr::mul(differentiate(u), v), Expr::mul(u, differentiate(v)));
    }
    case Op::Div: {
      Expr u = e.lhs(), v = e.rhs();
      Expr num = Expr::sub(Expr::mul(differentiate(u), v), Expr::mul(u, differentiate(v)));
      return Expr::div(num, Expr::mul(v, v));
    }
    case Op::Pow: {
      Expr u = e.lhs(), v = e.rhs();
      if (v.is_constant()) {
        double c = v.constant_value();
        return Expr::mul(Expr::mul(Expr::constant(c), Expr::pow(u, Expr::constant(c - 1.0))),
                         differentiate(u));
      }
      // d(u^v) = u^v * (v' log u + v u'/u)
      Expr inner = Expr::add(Expr::mul(differentiate(v), Expr::log(u)),
                             Expr::div(Expr::mul(v, differentiate(u)), u));
      return Expr::mul(e, inner);
    }
    case Op::Sqrt:
      return Expr::div(differentiate(e.lhs()), Expr::mul(Expr::constant(2.0), e));
    case Op::Log:
      return Expr::div(differentiate(e.lhs()), e.lhs());
  }
  return Expr::constant(0.0);
}

// ---------------------------------------------------------------------------
// Compiled evaluation

CompiledExpr::CompiledExpr(const Expr& e) {
  std::size_t depth = 0;
  std::function<void(const Expr&)> emit = [&](const Expr& n) {
    switch (n.op()) {
      case Expr::Op::Const:
      case Expr::Op::Var:
        code_.push_back({n.op(), n.constant_value()});
        max_stack_ = std::max(max_stack_, ++depth);
        return;
      case Expr::Op::Neg:
      case Expr::Op::Sqrt:
      case Expr::Op::Log:
        emit(n.lhs());
        code_.push_back({n.op(), 0.0});
        return;
      default:
        emit(n.lhs());
        emit(n.rhs());
        code_.push_back({n.op(), 0.0});
        --depth;
        return;
    }
  };
  emit(e);
}

double CompiledExpr::operator()(double x) const noexcept {
  constexpr std::size_t kInline = 32;
  std::array<double, kInline> small{};
  std::vector<double> big;
  double* st = small.data();
  if (max_stack_ > kInline) {
    big.resize(max_stack_);
    st = big.data();
  }
  std::size_t sp = 0;
  for (const Instr& ins : code_) {
    switch (ins.op) {
      case Expr::Op::Const: st[sp++] = ins.value; break;
      case Expr::Op::Var: st[sp++] = x; break;
      case Expr::Op::Neg: st[sp - 1] = -st[sp - 1]; break;
      case Expr::Op::Sqrt: st[sp - 1] = std::sqrt(st[sp - 1]); break;
      case Expr::Op::Log: st[sp - 1] = std::log(st[sp - 1]); break;
      default:
        --sp;
        st[sp - 1] = apply_binary(ins.op, st[sp - 1], st[sp]);
        break;
    }
  }
  return sp == 1 ? st[0] : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace pmaps
