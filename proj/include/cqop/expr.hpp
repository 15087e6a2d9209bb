#pragma once

// Symbolic scalar expressions used for scale factors and curvature fields.
//
// Grammar (whitespace-insensitive, standard precedence, left association):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' exponent)*
//   exponent:= ['-'] INTEGER | '(' ['-'] INTEGER ')'
//   primary := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'
//
// FUNC is one of sin, cos, tan, exp, log, sqrt. Powers take integer exponents
// only; write fractional powers through sqrt or exp/log.

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cqop {

enum class ExprErrorKind {
  syntax,
  unknown_function,
  unbound_variable,
  domain,
  invalid_variable,
};

class ExprError : public std::runtime_error {
public:
  ExprError(ExprErrorKind kind, std::string message, std::size_t offset = 0,
            std::string node = {});

  [[nodiscard]] ExprErrorKind kind() const noexcept { return kind_; }
  /// Byte offset into the parsed text (syntax and unknown-function errors).
  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }
  /// Printed form of the offending subexpression (evaluation errors).
  [[nodiscard]] const std::string& node() const noexcept { return node_; }

private:
  ExprErrorKind kind_;
  std::size_t offset_;
  std::string node_;
};

enum class ExprOp { number, variable, add, sub, mul, div, neg, pow, func };
enum class Func { sin, cos, tan, exp, log, sqrt };

struct ExprNode;

/// Immutable expression handle. Copies share the underlying tree.
class Expr {
public:
  Expr() = default;  // the literal 0
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

  static Expr number(double value);
  static Expr variable(std::string name);

  [[nodiscard]] const ExprNode& node() const;
  [[nodiscard]] ExprOp op() const;
  [[nodiscard]] bool is_number() const { return op() == ExprOp::number; }
  [[nodiscard]] bool is_number(double value) const;

  friend bool operator==(const Expr& a, const Expr& b);

private:
  std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
  ExprOp op = ExprOp::number;
  double value = 0.0;  // number
  int exponent = 0;    // pow
  Func func = Func::sin;
  std::string name;  // variable
  Expr lhs;          // unary operand / left operand / pow base / func argument
  Expr rhs;
};

// Constructors with literal constant folding. No algebraic simplification
// happens beyond folding numbers and dropping neutral elements.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, int exponent);
Expr apply(Func f, const Expr& arg);

using Bindings = std::map<std::string, double, std::less<>>;

[[nodiscard]] Expr parse(std::string_view text);
[[nodiscard]] Expr differentiate(const Expr& e, std::string_view var);
[[nodiscard]] double evaluate(const Expr& e, const Bindings& bindings);
[[nodiscard]] Expr substitute(const Expr& e, std::string_view var, double value);
[[nodiscard]] std::string to_string(const Expr& e);
[[nodiscard]] std::set<std::string> free_variables(const Expr& e);
[[nodiscard]] bool is_identifier(std::string_view name);

}  // namespace cqop
