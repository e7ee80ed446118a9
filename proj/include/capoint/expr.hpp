#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "capoint/errors.hpp"

namespace capoint {

enum class UnaryOp { Negate, Exp, Ln, Sqrt, Sin, Cos };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

// Immutable expression tree in the single variable x. Built by parse() or the
// node factories; copies share structure.
class Expr {
 public:
  Expr() = default;

  static Expr constant(double v);
  static Expr variable();
  static Expr unary(UnaryOp op, const Expr& a);
  static Expr binary(BinaryOp op, const Expr& a, const Expr& b);

  // Evaluates at x. Throws DomainError when an operation leaves its domain
  // (ln of a nonpositive value, sqrt of a negative value, division by zero,
  // zero to a negative power, negative base with fractional exponent).
  double operator()(double x) const;

  // Parseable text form; re-parsing yields an expression with identical
  // evaluation at every point.
  std::string str() const;

  bool empty() const { return root_ == nullptr; }

  struct Node;

 private:
  using NodePtr = std::shared_ptr<const Node>;
  explicit Expr(NodePtr n) : root_(std::move(n)) {}
  NodePtr root_;

  friend Expr parse(std::string_view src);
};

// Parses the grammar documented in docs/grammar.md. Throws ParseError with the
// byte offset of the first offending character.
Expr parse(std::string_view src);

}  // namespace capoint
