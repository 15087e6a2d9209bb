#include "cqop/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

namespace cqop {

ExprError::ExprError(ExprErrorKind kind, std::string message, std::size_t offset,
                     std::string node)
    : std::runtime_error(std::move(message)), kind_(kind), offset_(offset), node_(std::move(node)) {}

namespace {

const ExprNode& zero_node() {
  static const ExprNode zero{};
  return zero;
}

Expr make(ExprNode n) { return Expr(std::make_shared<const ExprNode>(std::move(n))); }

Expr make_binary(ExprOp op, Expr a, Expr b) {
  ExprNode n;
  n.op = op;
  n.lhs = std::move(a);
  n.rhs = std::move(b);
  return make(std::move(n));
}

Expr make_neg(Expr a) {
  ExprNode n;
  n.op = ExprOp::neg;
  n.lhs = std::move(a);
  return make(std::move(n));
}

Expr make_pow(Expr base, int exponent) {
  ExprNode n;
  n.op = ExprOp::pow;
  n.lhs = std::move(base);
  n.exponent = exponent;
  return make(std::move(n));
}

Expr make_func(Func f, Expr arg) {
  ExprNode n;
  n.op = ExprOp::func;
  n.func = f;
  n.lhs = std::move(arg);
  return make(std::move(n));
}

const char* func_name(Func f) {
  switch (f) {
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::tan: return "tan";
    case Func::exp: return "exp";
    case Func::log: return "log";
    case Func::sqrt: return "sqrt";
  }
  return "?";
}

bool lookup_func(std::string_view name, Func& out) {
  static constexpr std::pair<std::string_view, Func> table[] = {
      {"sin", Func::sin}, {"cos", Func::cos}, {"tan", Func::tan},
      {"exp", Func::exp}, {"log", Func::log}, {"sqrt", Func::sqrt},
  };
  for (const auto& [n, f] : table) {
    if (n == name) {
      out = f;
      return true;
    }
  }
  return false;
}

// Folds a literal result only when it stays finite.
bool fold(double v, Expr& out) {
  if (!std::isfinite(v)) return false;
  out = Expr::number(v);
  return true;
}

double int_power(double base, int exponent) {
  double result = 1.0;
  const unsigned n = exponent < 0 ? static_cast<unsigned>(-(long long)exponent) : static_cast<unsigned>(exponent);
  double b = base;
  for (unsigned k = n; k; k >>= 1) {
    if (k & 1u) result *= b;
    b *= b;
  }
  return exponent < 0 ? 1.0 / result : result;
}

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr run() {
    skip_ws();
    if (pos_ >= text_.size()) fail("empty expression");
    Expr e = parse_expr();
    skip_ws();
    if (pos_ < text_.size()) fail(std::string("unexpected character '") + text_[pos_] + "'");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& what) const { fail_at(pos_, what); }
  [[noreturn]] static void fail_at(std::size_t at, const std::string& what) {
    throw ExprError(ExprErrorKind::syntax, "syntax error at offset " + std::to_string(at) + ": " + what, at);
  }

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

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(ExprOp::add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = make_binary(ExprOp::sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(ExprOp::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = make_binary(ExprOp::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return make_neg(parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    while (accept('^')) base = make_pow(base, parse_exponent());
    return base;
  }

  int parse_exponent() {
    const bool paren = accept('(');
    const bool negative = accept('-');
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer exponent");
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
      fail("exponent must be an integer");
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc()) fail_at(start, "exponent out of range");
    if (paren && !accept(')')) fail("expected ')'");
    return negative ? -value : value;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        Func f{};
        if (!lookup_func(name, f)) {
          throw ExprError(ExprErrorKind::unknown_function,
                          "unknown function '" + std::string(name) + "' at offset " + std::to_string(start),
                          start);
        }
        ++pos_;
        Expr arg = parse_expr();
        if (!accept(')')) fail("expected ')'");
        return make_func(f, arg);
      }
      return Expr::variable(std::string(name));
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      const std::size_t exp_start = pos_;
      digits();
      if (exp_start == pos_) pos_ = save;  // 'e' belongs to something else
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_ || !std::isfinite(value))
      fail_at(start, "malformed number");
    return Expr::number(value);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double eval_node(const Expr& e, const Bindings& b);

[[noreturn]] void domain_error(const Expr& e, const std::string& what) {
  throw ExprError(ExprErrorKind::domain, "domain error: " + what + " in '" + to_string(e) + "'", 0,
                  to_string(e));
}

double checked(const Expr& e, double v) {
  if (!std::isfinite(v)) domain_error(e, "non-finite result");
  return v;
}

double eval_node(const Expr& e, const Bindings& b) {
  const ExprNode& n = e.node();
  switch (n.op) {
    case ExprOp::number: return n.value;
    case ExprOp::variable: {
      const auto it = b.find(n.name);
      if (it == b.end())
        throw ExprError(ExprErrorKind::unbound_variable, "unbound variable '" + n.name + "'", 0, n.name);
      return it->second;
    }
    case ExprOp::add: return checked(e, eval_node(n.lhs, b) + eval_node(n.rhs, b));
    case ExprOp::sub: return checked(e, eval_node(n.lhs, b) - eval_node(n.rhs, b));
    case ExprOp::mul: return checked(e, eval_node(n.lhs, b) * eval_node(n.rhs, b));
    case ExprOp::div: {
      const double num = eval_node(n.lhs, b);
      const double den = eval_node(n.rhs, b);
      if (den == 0.0) domain_error(e, "division by zero");
      return checked(e, num / den);
    }
    case ExprOp::neg: return -eval_node(n.lhs, b);
    case ExprOp::pow: {
      const double base = eval_node(n.lhs, b);
      if (base == 0.0 && n.exponent < 0) domain_error(e, "zero to a negative power");
      return checked(e, int_power(base, n.exponent));
    }
    case ExprOp::func: {
      const double x = eval_node(n.lhs, b);
      switch (n.func) {
        case Func::sin: return std::sin(x);
        case Func::cos: return std::cos(x);
        case Func::tan: return checked(e, std::tan(x));
        case Func::exp: return checked(e, std::exp(x));
        case Func::log:
          if (x <= 0.0) domain_error(e, "log of non-positive value");
          return std::log(x);
        case Func::sqrt:
          if (x < 0.0) domain_error(e, "sqrt of negative value");
          return std::sqrt(x);
      }
    }
  }
  return 0.0;
}

void print(const Expr& e, std::string& out) {
  const ExprNode& n = e.node();
  switch (n.op) {
    case ExprOp::number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      if (n.value < 0.0 || (n.value == 0.0 && std::signbit(n.value))) {
        out += "(-";
        std::snprintf(buf, sizeof buf, "%.17g", -n.value);
        out += buf;
        out += ')';
      } else {
        out += buf;
      }
      return;
    }
    case ExprOp::variable: out += n.name; return;
    case ExprOp::add:
    case ExprOp::sub:
    case ExprOp::mul:
    case ExprOp::div: {
      static constexpr const char* sym[] = {" + ", " - ", "*", "/"};
      out += '(';
      print(n.lhs, out);
      out += sym[static_cast<int>(n.op) - static_cast<int>(ExprOp::add)];
      print(n.rhs, out);
      out += ')';
      return;
    }
    case ExprOp::neg:
      out += "(-";
      print(n.lhs, out);
      out += ')';
      return;
    case ExprOp::pow: {
      const bool atomic = n.lhs.op() == ExprOp::variable || n.lhs.op() == ExprOp::func ||
                          (n.lhs.op() == ExprOp::number && n.lhs.node().value >= 0.0);
      if (!atomic) out += '(';
      print(n.lhs, out);
      if (!atomic) out += ')';
      out += '^';
      if (n.exponent < 0) {
        out += "(-" + std::to_string(-(long long)n.exponent) + ")";
      } else {
        out += std::to_string(n.exponent);
      }
      return;
    }
    case ExprOp::func:
      out += func_name(n.func);
      out += '(';
      print(n.lhs, out);
      out += ')';
      return;
  }
}

}  // namespace

const ExprNode& Expr::node() const { return node_ ? *node_ : zero_node(); }

ExprOp Expr::op() const { return node().op; }

bool Expr::is_number(double value) const { return is_number() && node().value == value; }

Expr Expr::number(double value) {
  ExprNode n;
  n.op = ExprOp::number;
  n.value = value;
  return make(std::move(n));
}

Expr Expr::variable(std::string name) {
  ExprNode n;
  n.op = ExprOp::variable;
  n.name = std::move(name);
  return make(std::move(n));
}

bool operator==(const Expr& a, const Expr& b) {
  const ExprNode& x = a.node();
  const ExprNode& y = b.node();
  if (&x == &y) return true;
  if (x.op != y.op) return false;
  switch (x.op) {
    case ExprOp::number: return x.value == y.value;
    case ExprOp::variable: return x.name == y.name;
    case ExprOp::neg: return x.lhs == y.lhs;
    case ExprOp::pow: return x.exponent == y.exponent && x.lhs == y.lhs;
    case ExprOp::func: return x.func == y.func && x.lhs == y.lhs;
    default: return x.lhs == y.lhs && x.rhs == y.rhs;
  }
}

Expr operator+(const Expr& a, const Expr& b) {
  Expr out;
  if (a.is_number() && b.is_number() && fold(a.node().value + b.node().value, out)) return out;
  if (a.is_number(0.0)) return b;
  if (b.is_number(0.0)) return a;
  return make_binary(ExprOp::add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  Expr out;
  if (a.is_number() && b.is_number() && fold(a.node().value - b.node().value, out)) return out;
  if (b.is_number(0.0)) return a;
  if (a.is_number(0.0)) return -b;
  return make_binary(ExprOp::sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  Expr out;
  if (a.is_number() && b.is_number() && fold(a.node().value * b.node().value, out)) return out;
  if (a.is_number(0.0) || b.is_number(0.0)) return Expr::number(0.0);
  if (a.is_number(1.0)) return b;
  if (b.is_number(1.0)) return a;
  return make_binary(ExprOp::mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  Expr out;
  if (b.is_number(0.0)) return make_binary(ExprOp::div, a, b);
  if (a.is_number() && b.is_number() && fold(a.node().value / b.node().value, out)) return out;
  if (a.is_number(0.0)) return Expr::number(0.0);
  if (b.is_number(1.0)) return a;
  return make_binary(ExprOp::div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_number()) return Expr::number(-a.node().value);
  if (a.op() == ExprOp::neg) return a.node().lhs;
  return make_neg(a);
}

Expr pow(const Expr& base, int exponent) {
  if (exponent == 0) return Expr::number(1.0);
  if (exponent == 1) return base;
  Expr out;
  if (base.is_number() && !(base.node().value == 0.0 && exponent < 0) &&
      fold(int_power(base.node().value, exponent), out))
    return out;
  return make_pow(base, exponent);
}

Expr apply(Func f, const Expr& arg) { return make_func(f, arg); }

Expr parse(std::string_view text) { return Parser(text).run(); }

bool is_identifier(std::string_view name) {
  if (name.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

Expr differentiate(const Expr& e, std::string_view var) {
  if (!is_identifier(var))
    throw ExprError(ExprErrorKind::invalid_variable, "invalid variable name '" + std::string(var) + "'");
  const ExprNode& n = e.node();
  switch (n.op) {
    case ExprOp::number: return Expr::number(0.0);
    case ExprOp::variable: return Expr::number(n.name == var ? 1.0 : 0.0);
    case ExprOp::add: return differentiate(n.lhs, var) + differentiate(n.rhs, var);
    case ExprOp::sub: return differentiate(n.lhs, var) - differentiate(n.rhs, var);
    case ExprOp::mul:
      return differentiate(n.lhs, var) * n.rhs + n.lhs * differentiate(n.rhs, var);
    case ExprOp::div:
      return (differentiate(n.lhs, var) * n.rhs - n.lhs * differentiate(n.rhs, var)) / pow(n.rhs, 2);
    case ExprOp::neg: return -differentiate(n.lhs, var);
    case ExprOp::pow:
      return Expr::number(n.exponent) * pow(n.lhs, n.exponent - 1) * differentiate(n.lhs, var);
    case ExprOp::func: {
      const Expr& u = n.lhs;
      const Expr du = differentiate(u, var);
      if (du.is_number(0.0)) return du;
      switch (n.func) {
        case Func::sin: return apply(Func::cos, u) * du;
        case Func::cos: return -(apply(Func::sin, u) * du);
        case Func::tan: return du / pow(apply(Func::cos, u), 2);
        case Func::exp: return e * du;
        case Func::log: return du / u;
        case Func::sqrt: return du / (Expr::number(2.0) * e);
      }
    }
  }
  return Expr::number(0.0);
}

double evaluate(const Expr& e, const Bindings& bindings) { return eval_node(e, bindings); }

Expr substitute(const Expr& e, std::string_view var, double value) {
  const ExprNode& n = e.node();
  switch (n.op) {
    case ExprOp::number: return e;
    case ExprOp::variable: return n.name == var ? Expr::number(value) : e;
    case ExprOp::add: return substitute(n.lhs, var, value) + substitute(n.rhs, var, value);
    case ExprOp::sub: return substitute(n.lhs, var, value) - substitute(n.rhs, var, value);
    case ExprOp::mul: return substitute(n.lhs, var, value) * substitute(n.rhs, var, value);
    case ExprOp::div: return substitute(n.lhs, var, value) / substitute(n.rhs, var, value);
    case ExprOp::neg: return -substitute(n.lhs, var, value);
    case ExprOp::pow: return pow(substitute(n.lhs, var, value), n.exponent);
    case ExprOp::func: return apply(n.func, substitute(n.lhs, var, value));
  }
  return e;
}

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  const auto walk = [&out](const auto& self, const Expr& x) -> void {
    const ExprNode& n = x.node();
    switch (n.op) {
      case ExprOp::number: return;
      case ExprOp::variable: out.insert(n.name); return;
      case ExprOp::neg:
      case ExprOp::pow:
      case ExprOp::func: self(self, n.lhs); return;
      default:
        self(self, n.lhs);
        self(self, n.rhs);
    }
  };
  walk(walk, e);
  return out;
}

}  // namespace cqop
