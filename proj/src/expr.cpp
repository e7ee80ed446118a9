#include "capoint/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "capoint/numerics.hpp"

namespace capoint {

struct Expr::Node {
  enum class Kind { Const, Var, Unary, Binary };
  Kind kind;
  double value = 0.0;
  UnaryOp uop = UnaryOp::Negate;
  BinaryOp bop = BinaryOp::Add;
  NodePtr lhs, rhs;
};

namespace {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;

double eval_node(const Node& n, double x) {
  switch (n.kind) {
    case Node::Kind::Const:
      return n.value;
    case Node::Kind::Var:
      return x;
    case Node::Kind::Unary: {
      const double v = eval_node(*n.lhs, x);
      switch (n.uop) {
        case UnaryOp::Negate:
          return -v;
        case UnaryOp::Exp:
          return std::exp(v);
        case UnaryOp::Ln:
          if (!(v > 0.0)) throw DomainError("ln of nonpositive argument");
          return std::log(v);
        case UnaryOp::Sqrt:
          if (v < 0.0) throw DomainError("sqrt of negative argument");
          return std::sqrt(v);
        case UnaryOp::Sin:
          return std::sin(v);
        case UnaryOp::Cos:
          return std::cos(v);
      }
      break;
    }
    case Node::Kind::Binary: {
      const double a = eval_node(*n.lhs, x);
      const double b = eval_node(*n.rhs, x);
      switch (n.bop) {
        case BinaryOp::Add:
          return a + b;
        case BinaryOp::Sub:
          return a - b;
        case BinaryOp::Mul:
          return a * b;
        case BinaryOp::Div:
          if (b == 0.0) throw DomainError("division by zero");
          return a / b;
        case BinaryOp::Pow: {
          if (a == 0.0 && b == 0.0) return 1.0;  // 0^0 convention
          if (a == 0.0 && b < 0.0) throw DomainError("zero raised to a negative power");
          const double r = std::pow(a, b);
          if (std::isnan(r))
            throw DomainError("negative base raised to a non-integer power");
          return r;
        }
      }
      break;
    }
  }
  throw DomainError("malformed expression node");
}

// Precedence levels used by both the parser and the printer.
// add/sub = 1, mul/div = 2, unary minus = 3, pow = 4, atoms = 5.
int node_prec(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Const:
      return n.value < 0.0 ? 3 : 5;
    case Node::Kind::Var:
      return 5;
    case Node::Kind::Unary:
      return n.uop == UnaryOp::Negate ? 3 : 5;
    case Node::Kind::Binary:
      switch (n.bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
          return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div:
          return 2;
        case BinaryOp::Pow:
          return 4;
      }
  }
  return 5;
}

void print_node(const Node& n, std::string& out);

void print_child(const Node& child, int min_prec, std::string& out) {
  if (node_prec(child) < min_prec) {
    out += '(';
    print_node(child, out);
    out += ')';
  } else {
    print_node(child, out);
  }
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case Node::Kind::Const:
      out += num::format_num(n.value);
      return;
    case Node::Kind::Var:
      out += 'x';
      return;
    case Node::Kind::Unary:
      switch (n.uop) {
        case UnaryOp::Negate:
          out += '-';
          // parenthesize a nested leading '-' for readability
          print_child(*n.lhs, node_prec(*n.lhs) == 3 ? 4 : 3, out);
          return;
        case UnaryOp::Exp:
          out += "exp(";
          break;
        case UnaryOp::Ln:
          out += "ln(";
          break;
        case UnaryOp::Sqrt:
          out += "sqrt(";
          break;
        case UnaryOp::Sin:
          out += "sin(";
          break;
        case UnaryOp::Cos:
          out += "cos(";
          break;
      }
      print_node(*n.lhs, out);
      out += ')';
      return;
    case Node::Kind::Binary: {
      const int prec = node_prec(n);
      const char* op = nullptr;
      switch (n.bop) {
        case BinaryOp::Add:
          op = "+";
          break;
        case BinaryOp::Sub:
          op = "-";
          break;
        case BinaryOp::Mul:
          op = "*";
          break;
        case BinaryOp::Div:
          op = "/";
          break;
        case BinaryOp::Pow:
          op = "^";
          break;
      }
      if (n.bop == BinaryOp::Pow) {
        // right-associative: wrap a left child of equal precedence
        print_child(*n.lhs, prec + 1, out);
        out += op;
        print_child(*n.rhs, prec, out);
      } else {
        print_child(*n.lhs, prec, out);
        out += op;
        // left-associative: wrap a right child of equal precedence
        print_child(*n.rhs, prec + 1, out);
      }
      return;
    }
  }
}

NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Const;
  n->value = v;
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr run() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("empty expression", 0);
    NodePtr n = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) throw ParseError("unexpected trailing input", pos_);
    return n;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      NodePtr rhs = parse_term();
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Binary;
      n->bop = c == '+' ? BinaryOp::Add : BinaryOp::Sub;
      n->lhs = std::move(lhs);
      n->rhs = std::move(rhs);
      lhs = std::move(n);
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      NodePtr rhs = parse_unary();
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Binary;
      n->bop = c == '*' ? BinaryOp::Mul : BinaryOp::Div;
      n->lhs = std::move(lhs);
      n->rhs = std::move(rhs);
      lhs = std::move(n);
    }
  }

  NodePtr parse_unary() {
    if (peek() == '-') {
      ++pos_;
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Unary;
      n->uop = UnaryOp::Negate;
      n->lhs = parse_unary();
      return n;
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (peek() != '^') return base;
    ++pos_;
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->bop = BinaryOp::Pow;
    n->lhs = std::move(base);
    n->rhs = parse_unary();  // right-associative; allows 2^-3
    return n;
  }

  NodePtr parse_atom() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (peek() != ')') throw ParseError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    if (c == '\0') throw ParseError("unexpected end of input", pos_);
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ == start || (pos_ == start + 1 && src_[start] == '.'))
      throw ParseError("malformed number", start);
    // exponent part only if digits follow; otherwise the 'e' is an identifier
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        ++p;
        while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) ++p;
        pos_ = p;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    return make_const(std::strtod(text.c_str(), nullptr));
  }

  NodePtr parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string id(src_.substr(start, pos_ - start));
    if (id == "x") {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Var;
      return n;
    }
    if (id == "pi") return make_const(std::numbers::pi);
    if (id == "e") return make_const(std::numbers::e);
    UnaryOp op;
    if (id == "exp")
      op = UnaryOp::Exp;
    else if (id == "ln")
      op = UnaryOp::Ln;
    else if (id == "sqrt")
      op = UnaryOp::Sqrt;
    else if (id == "sin")
      op = UnaryOp::Sin;
    else if (id == "cos")
      op = UnaryOp::Cos;
    else
      throw ParseError("unknown identifier '" + id + "'", start);
    if (peek() != '(')
      throw ParseError("function '" + id + "' requires a parenthesized argument", pos_);
    ++pos_;
    NodePtr arg = parse_expr();
    if (peek() != ')') throw ParseError("expected ')'", pos_);
    ++pos_;
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Unary;
    n->uop = op;
    n->lhs = std::move(arg);
    return n;
  }
};

}  // namespace

Expr Expr::constant(double v) { return Expr(make_const(v)); }

Expr Expr::variable() {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Var;
  return Expr(std::move(n));
}

Expr Expr::unary(UnaryOp op, const Expr& a) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Unary;
  n->uop = op;
  n->lhs = a.root_;
  return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, const Expr& a, const Expr& b) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Binary;
  n->bop = op;
  n->lhs = a.root_;
  n->rhs = b.root_;
  return Expr(std::move(n));
}

double Expr::operator()(double x) const {
  if (!root_) throw DomainError("evaluating empty expression");
  return eval_node(*root_, x);
}

std::string Expr::str() const {
  if (!root_) return "";
  std::string out;
  print_node(*root_, out);
  return out;
}

Expr parse(std::string_view src) {
  Parser p(src);
  return Expr(p.run());
}

}  // namespace capoint
