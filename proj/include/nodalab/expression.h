#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nodalab {

/// Immutable closed-form expression over named real variables.
///
/// Grammar: sums and differences of products and quotients of powers
/// (`^`, right-associative) of numbers, variables, `pi`, parenthesised
/// expressions, unary minus, and the functions sin cos tan exp log sqrt abs.
class Expression {
 public:
  struct Node;

  /// Throws Error(parse_error) naming the offending position.
  static Expression parse(std::string_view text, std::vector<std::string> variables);
  static Expression constant(double value, std::vector<std::string> variables = {});

  double evaluate(std::span<const double> values) const;
  double evaluate(double value) const;  // single-variable shorthand
  /// Symbolic partial derivative.
  Expression derivative(std::size_t variable) const;
  bool depends_on(std::size_t variable) const;
  /// True when the expression contains no variables at all.
  bool is_constant() const;

  /// Coefficients c_0..c_k of the expression as a polynomial in `variable`,
  /// each free of that variable; nullopt if it is not polynomial in it.
  std::optional<std::vector<Expression>> polynomial_in(std::size_t variable) const;

  const std::vector<std::string>& variables() const { return variables_; }
  std::string to_string() const;

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);

 private:
  Expression(std::shared_ptr<const Node> root, std::vector<std::string> variables);

  std::shared_ptr<const Node> root_;
  std::vector<std::string> variables_;
};

/// Evaluates a variable-free expression such as "2*pi" or "0.5".
double evaluate_constant(std::string_view text);

}  // namespace nodalab
