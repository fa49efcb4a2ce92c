#include "eigenflow/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "eigenflow/errors.hpp"

namespace eigenflow {

namespace {

ExprNodePtr make_node(ExprOp op, ExprNodePtr a = nullptr, ExprNodePtr b = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

double eval_node(const ExprNode& n, std::span<const double> x, std::span<const double> u) {
  switch (n.op) {
    case ExprOp::Constant:
      return n.value;
    case ExprOp::Coord:
      return n.index < static_cast<int>(x.size()) ? x[n.index] : 0.0;
    case ExprOp::Control:
      return n.index < static_cast<int>(u.size()) ? u[n.index] : 0.0;
    case ExprOp::Add:
      return eval_node(*n.a, x, u) + eval_node(*n.b, x, u);
    case ExprOp::Sub:
      return eval_node(*n.a, x, u) - eval_node(*n.b, x, u);
    case ExprOp::Mul:
      return eval_node(*n.a, x, u) * eval_node(*n.b, x, u);
    case ExprOp::Div:
      return eval_node(*n.a, x, u) / eval_node(*n.b, x, u);
    case ExprOp::Pow:
      return std::pow(eval_node(*n.a, x, u), eval_node(*n.b, x, u));
    case ExprOp::Neg:
      return -eval_node(*n.a, x, u);
    case ExprOp::Exp:
      return std::exp(eval_node(*n.a, x, u));
    case ExprOp::Log:
      return std::log(eval_node(*n.a, x, u));
    case ExprOp::Sin:
      return std::sin(eval_node(*n.a, x, u));
    case ExprOp::Cos:
      return std::cos(eval_node(*n.a, x, u));
    case ExprOp::Sqrt:
      return std::sqrt(eval_node(*n.a, x, u));
    case ExprOp::Abs:
      return std::fabs(eval_node(*n.a, x, u));
    case ExprOp::Tanh:
      return std::tanh(eval_node(*n.a, x, u));
    case ExprOp::Min:
      return std::fmin(eval_node(*n.a, x, u), eval_node(*n.b, x, u));
    case ExprOp::Max:
      return std::fmax(eval_node(*n.a, x, u), eval_node(*n.b, x, u));
  }
  return 0.0;
}

bool is_unary_fn(ExprOp op) {
  switch (op) {
    case ExprOp::Exp:
    case ExprOp::Log:
    case ExprOp::Sin:
    case ExprOp::Cos:
    case ExprOp::Sqrt:
    case ExprOp::Abs:
    case ExprOp::Tanh:
      return true;
    default:
      return false;
  }
}

const char* fn_name(ExprOp op) {
  switch (op) {
    case ExprOp::Exp: return "exp";
    case ExprOp::Log: return "log";
    case ExprOp::Sin: return "sin";
    case ExprOp::Cos: return "cos";
    case ExprOp::Sqrt: return "sqrt";
    case ExprOp::Abs: return "abs";
    case ExprOp::Tanh: return "tanh";
    case ExprOp::Min: return "min";
    case ExprOp::Max: return "max";
    default: return "?";
  }
}

// Printing precedence: additive 1, multiplicative 2, unary minus 3, power 4,
// atoms 5. Matches the parser so that parse(str()) round-trips.
int precedence(ExprOp op) {
  switch (op) {
    case ExprOp::Add:
    case ExprOp::Sub:
      return 1;
    case ExprOp::Mul:
    case ExprOp::Div:
      return 2;
    case ExprOp::Neg:
      return 3;
    case ExprOp::Pow:
      return 4;
    default:
      return 5;
  }
}

void print_node(const ExprNode& n, std::string& out);

void print_child(const ExprNode& child, int min_prec, std::string& out) {
  bool wrap = precedence(child.op) < min_prec;
  if (wrap) out += '(';
  print_node(child, out);
  if (wrap) out += ')';
}

void print_node(const ExprNode& n, std::string& out) {
  char buf[40];
  switch (n.op) {
    case ExprOp::Constant:
      if (n.value < 0 || std::signbit(n.value)) {
        std::snprintf(buf, sizeof buf, "(%.17g)", n.value);
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
      }
      out += buf;
      return;
    case ExprOp::Coord:
      out += 'x';
      out += std::to_string(n.index);
      return;
    case ExprOp::Control:
      out += 'u';
      out += std::to_string(n.index);
      return;
    case ExprOp::Add:
      print_child(*n.a, 1, out);
      out += " + ";
      print_child(*n.b, 2, out);
      return;
    case ExprOp::Sub:
      print_child(*n.a, 1, out);
      out += " - ";
      print_child(*n.b, 2, out);
      return;
    case ExprOp::Mul:
      print_child(*n.a, 2, out);
      out += "*";
      print_child(*n.b, 3, out);
      return;
    case ExprOp::Div:
      print_child(*n.a, 2, out);
      out += "/";
      print_child(*n.b, 5, out);
      return;
    case ExprOp::Neg:
      out += '-';
      print_child(*n.a, 3, out);
      return;
    case ExprOp::Pow:
      print_child(*n.a, 5, out);
      out += '^';
      print_child(*n.b, 3, out);
      return;
    default:
      out += fn_name(n.op);
      out += '(';
      print_node(*n.a, out);
      if (n.b) {
        out += ", ";
        print_node(*n.b, out);
      }
      out += ')';
      return;
  }
}

struct Parser {
  std::string_view src;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) { throw SyntaxError(msg, pos); }

  ExprNodePtr parse_expr() {
    ExprNodePtr lhs = parse_term();
    for (;;) {
      skip_ws();
      if (pos >= src.size()) return lhs;
      char c = src[pos];
      if (c == '+' || c == '-') {
        ++pos;
        ExprNodePtr rhs = parse_term();
        lhs = make_node(c == '+' ? ExprOp::Add : ExprOp::Sub, lhs, rhs);
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr parse_term() {
    ExprNodePtr lhs = parse_unary();
    for (;;) {
      skip_ws();
      if (pos >= src.size()) return lhs;
      char c = src[pos];
      if (c == '*' || c == '/') {
        ++pos;
        ExprNodePtr rhs = parse_unary();
        lhs = make_node(c == '*' ? ExprOp::Mul : ExprOp::Div, lhs, rhs);
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr parse_unary() {
    skip_ws();
    if (pos < src.size() && src[pos] == '-') {
      ++pos;
      return make_node(ExprOp::Neg, parse_unary());
    }
    if (pos < src.size() && src[pos] == '+') {
      ++pos;
      return parse_unary();
    }
    return parse_power();
  }

  ExprNodePtr parse_power() {
    ExprNodePtr base = parse_atom();
    skip_ws();
    if (pos < src.size() && src[pos] == '^') {
      ++pos;
      // Right-associative; the exponent may carry a sign: x^-2.
      ExprNodePtr exponent = parse_unary();
      return make_node(ExprOp::Pow, base, exponent);
    }
    return base;
  }

  ExprNodePtr parse_atom() {
    skip_ws();
    if (pos >= src.size()) fail("unexpected end of input");
    char c = src[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    if (c == '(') {
      ++pos;
      ExprNodePtr inner = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  ExprNodePtr parse_number() {
    const char* begin = src.data() + pos;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos += static_cast<std::size_t>(end - begin);
    auto n = make_node(ExprOp::Constant);
    const_cast<ExprNode&>(*n).value = v;
    return n;
  }

  ExprNodePtr parse_identifier() {
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    std::string_view name = src.substr(start, pos - start);

    // Coordinates and controls: x<i>, u<j>.
    if ((name[0] == 'x' || name[0] == 'u') && name.size() > 1) {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
      if (digits) {
        int idx = std::atoi(std::string(name.substr(1)).c_str());
        auto n = make_node(name[0] == 'x' ? ExprOp::Coord : ExprOp::Control);
        const_cast<ExprNode&>(*n).index = idx;
        return n;
      }
    }

    ExprOp op;
    int arity = 1;
    if (name == "exp") op = ExprOp::Exp;
    else if (name == "log") op = ExprOp::Log;
    else if (name == "sin") op = ExprOp::Sin;
    else if (name == "cos") op = ExprOp::Cos;
    else if (name == "sqrt") op = ExprOp::Sqrt;
    else if (name == "abs") op = ExprOp::Abs;
    else if (name == "tanh") op = ExprOp::Tanh;
    else if (name == "min") { op = ExprOp::Min; arity = 2; }
    else if (name == "max") { op = ExprOp::Max; arity = 2; }
    else
      throw UnknownIdentifier("unknown identifier '" + std::string(name) +
                              "' (expected x<i>, u<j>, or a builtin function)");

    if (!eat('(')) fail("expected '(' after function name");
    ExprNodePtr a = parse_expr();
    ExprNodePtr b;
    if (arity == 2) {
      if (!eat(',')) fail("expected ',' in two-argument function");
      b = parse_expr();
    }
    if (!eat(')')) fail("expected ')'");
    return make_node(op, a, b);
  }
};

void scan_indices(const ExprNode& n, int& max_x, int& max_u) {
  switch (n.op) {
    case ExprOp::Coord:
      if (n.index > max_x) max_x = n.index;
      return;
    case ExprOp::Control:
      if (n.index > max_u) max_u = n.index;
      return;
    default:
      if (n.a) scan_indices(*n.a, max_x, max_u);
      if (n.b) scan_indices(*n.b, max_x, max_u);
  }
}

}  // namespace

Expr Expr::parse(std::string_view source) {
  if (source.empty()) throw SyntaxError("empty expression", 0);
  Parser p{source};
  ExprNodePtr root = p.parse_expr();
  p.skip_ws();
  if (p.pos != source.size()) p.fail("trailing input");
  return Expr(std::move(root));
}

Expr Expr::constant(double v) {
  auto n = make_node(ExprOp::Constant);
  const_cast<ExprNode&>(*n).value = v;
  return Expr(std::move(n));
}

Expr Expr::coord(int i) {
  auto n = make_node(ExprOp::Coord);
  const_cast<ExprNode&>(*n).index = i;
  return Expr(std::move(n));
}

Expr Expr::control(int j) {
  auto n = make_node(ExprOp::Control);
  const_cast<ExprNode&>(*n).index = j;
  return Expr(std::move(n));
}

static ExprNodePtr root_or_zero(const Expr& e) {
  return e.root() ? e.root() : Expr::constant(0).root();
}

Expr Expr::unary(ExprOp op, const Expr& arg) {
  if (!is_unary_fn(op) && op != ExprOp::Neg)
    throw InvalidArgument("unary: not a unary operator");
  return Expr(make_node(op, root_or_zero(arg)));
}

Expr Expr::binary(ExprOp op, const Expr& lhs, const Expr& rhs) {
  switch (op) {
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
    case ExprOp::Div:
    case ExprOp::Pow:
    case ExprOp::Min:
    case ExprOp::Max:
      return Expr(make_node(op, root_or_zero(lhs), root_or_zero(rhs)));
    default:
      throw InvalidArgument("binary: not a binary operator");
  }
}

double Expr::eval(std::span<const double> x, std::span<const double> u) const {
  if (!root_) return 0.0;
  return eval_node(*root_, x, u);
}

std::string Expr::str() const {
  if (!root_) return "0";
  std::string out;
  print_node(*root_, out);
  return out;
}

bool Expr::is_constant() const { return !depends_on_coords() && !depends_on_controls(); }
bool Expr::depends_on_coords() const { return max_coord_index() >= 0; }
bool Expr::depends_on_controls() const { return max_control_index() >= 0; }

int Expr::max_coord_index() const {
  int mx = -1, mu = -1;
  if (root_) scan_indices(*root_, mx, mu);
  return mx;
}

int Expr::max_control_index() const {
  int mx = -1, mu = -1;
  if (root_) scan_indices(*root_, mx, mu);
  return mu;
}

Expr operator+(const Expr& l, const Expr& r) { return Expr::binary(ExprOp::Add, l, r); }
Expr operator-(const Expr& l, const Expr& r) { return Expr::binary(ExprOp::Sub, l, r); }
Expr operator*(const Expr& l, const Expr& r) { return Expr::binary(ExprOp::Mul, l, r); }
Expr operator/(const Expr& l, const Expr& r) { return Expr::binary(ExprOp::Div, l, r); }
Expr operator-(const Expr& e) { return Expr::unary(ExprOp::Neg, e); }
Expr Expr::pow(const Expr& exponent) const { return Expr::binary(ExprOp::Pow, *this, exponent); }

}  // namespace eigenflow
