#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace jsde {

/// Parse failure inside an expression; `position` is the 0-based offset.
class ExpressionError : public std::runtime_error {
 public:
  ExpressionError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Compiled arithmetic expression in the variables x, u and t.
///
/// Grammar, loosest binding first:
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | '+' unary | power
///   power   := atom ('^' unary)?            right-associative, so -x^2 = -(x^2)
///   atom    := number | x | u | t | pi | e | inf | name '(' sum ')' | '(' sum ')'
/// Functions: ln, log (natural), exp, sqrt, abs, sign, cbrt.
class Expression {
 public:
  static Expression parse(std::string_view text);

  double operator()(double x, double u = 0.0, double t = 0.0) const;
  bool uses(char variable) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  unsigned variables_ = 0;
};

/// Evaluates a constant expression ("2^-8", "1/256", "5e-3").
double evaluate_constant(std::string_view text);

}  // namespace jsde
