#include "jsde/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

namespace jsde {

struct Expression::Node {
  enum class Op { constant, var_x, var_u, var_t, neg, add, sub, mul, div, pow, call };
  enum class Fn { ln, exp, sqrt, abs, sign, cbrt };

  Op op = Op::constant;
  Fn fn = Fn::ln;
  double value = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  double eval(double x, double u, double t) const {
    switch (op) {
      case Op::constant: return value;
      case Op::var_x: return x;
      case Op::var_u: return u;
      case Op::var_t: return t;
      case Op::neg: return -lhs->eval(x, u, t);
      case Op::add: return lhs->eval(x, u, t) + rhs->eval(x, u, t);
      case Op::sub: return lhs->eval(x, u, t) - rhs->eval(x, u, t);
      case Op::mul: return lhs->eval(x, u, t) * rhs->eval(x, u, t);
      case Op::div: return lhs->eval(x, u, t) / rhs->eval(x, u, t);
      case Op::pow: return std::pow(lhs->eval(x, u, t), rhs->eval(x, u, t));
      case Op::call: {
        const double a = lhs->eval(x, u, t);
        switch (fn) {
          case Fn::ln: return std::log(a);
          case Fn::exp: return std::exp(a);
          case Fn::sqrt: return std::sqrt(a);
          case Fn::abs: return std::abs(a);
          case Fn::sign: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
          case Fn::cbrt: return std::cbrt(a);
        }
      }
    }
    return NAN;
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

NodePtr constant(double v) {
  auto n = std::make_shared<Node>();
  n->value = v;
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  NodePtr parse_all(unsigned& variables) {
    NodePtr n = sum();
    skip();
    if (i_ < s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    variables = variables_;
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ExpressionError(what, i_); }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr n = product();
    while (true) {
      if (eat('+'))
        n = make(Node::Op::add, n, product());
      else if (eat('-'))
        n = make(Node::Op::sub, n, product());
      else
        return n;
    }
  }

  NodePtr product() {
    NodePtr n = unary();
    while (true) {
      if (eat('*'))
        n = make(Node::Op::mul, n, unary());
      else if (eat('/'))
        n = make(Node::Op::div, n, unary());
      else
        return n;
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Node::Op::neg, unary());
    if (eat('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) return make(Node::Op::pow, base, unary());
    return base;
  }

  NodePtr atom() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[i_];
    if (c == '(') {
      ++i_;
      NodePtr n = sum();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return name();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = i_;
    while (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) ++i_;
    if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
      std::size_t j = i_ + 1;
      if (j < s_.size() && (s_[j] == '+' || s_[j] == '-')) ++j;
      if (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) {
        i_ = j;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      }
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + i_, v);
    if (ec != std::errc() || ptr != s_.data() + i_) {
      i_ = start;
      fail("malformed number");
    }
    return constant(v);
  }

  NodePtr name() {
    const std::size_t start = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
    const std::string_view id = s_.substr(start, i_ - start);
    if (id == "x") return var(Node::Op::var_x, 1u);
    if (id == "u") return var(Node::Op::var_u, 2u);
    if (id == "t") return var(Node::Op::var_t, 4u);
    if (id == "pi") return constant(std::numbers::pi);
    if (id == "e") return constant(std::numbers::e);
    if (id == "inf") return constant(INFINITY);
    Node::Fn fn;
    if (id == "ln" || id == "log")
      fn = Node::Fn::ln;
    else if (id == "exp")
      fn = Node::Fn::exp;
    else if (id == "sqrt")
      fn = Node::Fn::sqrt;
    else if (id == "abs")
      fn = Node::Fn::abs;
    else if (id == "sign")
      fn = Node::Fn::sign;
    else if (id == "cbrt")
      fn = Node::Fn::cbrt;
    else {
      i_ = start;
      fail("unknown name '" + std::string(id) +
           "' (variables x, u, t; constants pi, e, inf; functions ln, log, exp, sqrt, abs, sign, cbrt)");
    }
    if (!eat('(')) fail("expected '(' after " + std::string(id));
    auto n = std::make_shared<Node>();
    n->op = Node::Op::call;
    n->fn = fn;
    n->lhs = sum();
    if (!eat(')')) fail("expected ')'");
    return n;
  }

  NodePtr var(Node::Op op, unsigned bit) {
    variables_ |= bit;
    return make(op);
  }

  std::string_view s_;
  std::size_t i_ = 0;
  unsigned variables_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.text_ = std::string(text);
  Parser p(e.text_);
  e.root_ = p.parse_all(e.variables_);
  return e;
}

double Expression::operator()(double x, double u, double t) const { return root_->eval(x, u, t); }

bool Expression::uses(char variable) const {
  switch (variable) {
    case 'x': return variables_ & 1u;
    case 'u': return variables_ & 2u;
    case 't': return variables_ & 4u;
  }
  return false;
}

double evaluate_constant(std::string_view text) {
  const Expression e = Expression::parse(text);
  if (e.uses('x') || e.uses('u') || e.uses('t'))
    throw ExpressionError("expected a constant, found a variable", 0);
  return e(0.0);
}

}  // namespace jsde
