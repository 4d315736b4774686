// Small arithmetic expression language for user-defined fields f(x, v, t):
// literals, the variables x / v / t, the operators + - * / ^ and unary
// minus, and the functions sin, cos, sqrt, abs.
#pragma once

#include <memory>
#include <string>

#include "chatter/model.hpp"

namespace chatter {

struct SyntaxError : std::runtime_error {
  SyntaxError(std::size_t pos, const std::string& expected, const std::string& found)
      : std::runtime_error("syntax error at offset " + std::to_string(pos) + ": expected " +
                           expected + ", found " + found),
        position(pos), expected(expected) {}
  std::size_t position;
  std::string expected;
};

struct UnknownIdentifier : std::runtime_error {
  UnknownIdentifier(std::size_t pos, const std::string& name)
      : std::runtime_error("unknown identifier '" + name + "' at offset " +
                           std::to_string(pos)),
        position(pos), name(name) {}
  std::size_t position;
  std::string name;
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Expression {
 public:
  struct Node;

  /// Parses with standard precedence: ^ binds tightest (right-associative),
  /// then unary minus, then * /, then + -. No implicit multiplication.
  static Expression parse(const std::string& text);

  double eval(double x, double v, double t) const;

  /// Canonical printable form; reparsing it yields a structurally equal tree.
  std::string str() const;

  bool equals(const Expression& other) const;
  bool uses_time() const;

  VectorField as_field() const;

 private:
  explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

inline Expression parse_expression(const std::string& text) { return Expression::parse(text); }

}  // namespace chatter
