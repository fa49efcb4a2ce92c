#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace eigenflow {

enum class ExprOp {
  Constant,
  Coord,    // x0, x1, x2
  Control,  // u0, u1, ...
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Exp,
  Log,
  Sin,
  Cos,
  Sqrt,
  Abs,
  Tanh,
  Min,
  Max,
};

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprOp op;
  double value = 0.0;  // Constant
  int index = 0;       // Coord / Control
  ExprNodePtr a;       // first child (unary operand / binary lhs)
  ExprNodePtr b;       // second child
};

// Closed arithmetic DSL over coordinates x0..x{d-1} and controls u0..u{m-1}.
// Immutable; copies share structure and are cheap. Evaluation is pure and
// deterministic: identical inputs give bit-identical results.
class Expr {
 public:
  Expr() = default;  // constant 0

  // Throws SyntaxError (with byte offset) or UnknownIdentifier.
  static Expr parse(std::string_view source);

  static Expr constant(double v);
  static Expr coord(int i);
  static Expr control(int j);
  static Expr unary(ExprOp op, const Expr& arg);
  static Expr binary(ExprOp op, const Expr& lhs, const Expr& rhs);

  double eval(std::span<const double> x, std::span<const double> u = {}) const;

  // parse(str()) evaluates identically to *this at every point.
  std::string str() const;

  bool is_constant() const;
  bool depends_on_coords() const;
  bool depends_on_controls() const;
  int max_coord_index() const;    // -1 when no x dependence
  int max_control_index() const;  // -1 when no u dependence

  friend Expr operator+(const Expr& l, const Expr& r);
  friend Expr operator-(const Expr& l, const Expr& r);
  friend Expr operator*(const Expr& l, const Expr& r);
  friend Expr operator/(const Expr& l, const Expr& r);
  friend Expr operator-(const Expr& e);
  Expr pow(const Expr& exponent) const;

  const ExprNodePtr& root() const { return root_; }

 private:
  explicit Expr(ExprNodePtr root) : root_(std::move(root)) {}
  ExprNodePtr root_;
};

}  // namespace eigenflow
