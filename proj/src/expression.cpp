#include "chatter/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace chatter {

namespace {

enum class Op { number, var_x, var_v, var_t, add, sub, mul, divide, power, neg, sin, cos, sqrt, abs };

// Precedence used when printing; higher binds tighter.
int precedence(Op op) {
  switch (op) {
    case Op::add: case Op::sub: return 1;
    case Op::mul: case Op::divide: return 2;
    case Op::neg: return 3;
    case Op::power: return 4;
    default: return 5;
  }
}

}  // namespace

struct Expression::Node {
  Op op;
  double value = 0.0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_node(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double value = 0.0) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->value = value;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  NodePtr parse() {
    auto node = parse_sum();
    skip_ws();
    if (pos_ != text_.size())
      throw SyntaxError(pos_, "end of input or an operator", describe_here());
    return node;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool consume(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string describe_here() {
    if (pos_ >= text_.size()) return "end of input";
    return std::string("'") + text_[pos_] + "'";
  }

  NodePtr parse_sum() {
    auto lhs = parse_term();
    while (true) {
      if (consume('+')) lhs = make_node(Op::add, lhs, parse_term());
      else if (consume('-')) lhs = make_node(Op::sub, lhs, parse_term());
      else return lhs;
    }
  }

  NodePtr parse_term() {
    auto lhs = parse_factor();
    while (true) {
      if (consume('*')) lhs = make_node(Op::mul, lhs, parse_factor());
      else if (consume('/')) lhs = make_node(Op::divide, lhs, parse_factor());
      else return lhs;
    }
  }

  // Unary minus; binds looser than ^ so -x^2 negates the power.
  NodePtr parse_factor() {
    if (consume('-')) return make_node(Op::neg, parse_factor());
    return parse_power();
  }

  // Right-associative: the exponent is parsed as a factor so that both
  // 2^3^2 = 2^(3^2) and 2^-3 work.
  NodePtr parse_power() {
    auto base = parse_atom();
    if (consume('^')) return make_node(Op::power, base, parse_factor());
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size())
      throw SyntaxError(pos_, "a number, variable, function or '('", "end of input");
    const char c = text_[pos_];

    if (c == '(') {
      ++pos_;
      auto inner = parse_sum();
      if (!consume(')')) throw SyntaxError(pos_, "')'", describe_here());
      return inner;
    }

    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();

    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string name = text_.substr(start, pos_ - start);
      if (name == "x") return make_node(Op::var_x);
      if (name == "v") return make_node(Op::var_v);
      if (name == "t") return make_node(Op::var_t);
      Op fn;
      if (name == "sin") fn = Op::sin;
      else if (name == "cos") fn = Op::cos;
      else if (name == "sqrt") fn = Op::sqrt;
      else if (name == "abs") fn = Op::abs;
      else throw UnknownIdentifier(start, name);
      if (!consume('(')) throw SyntaxError(pos_, "'(' after " + name, describe_here());
      auto arg = parse_sum();
      if (!consume(')')) throw SyntaxError(pos_, "')'", describe_here());
      return make_node(fn, arg);
    }

    throw SyntaxError(pos_, "a number, variable, function or '('", describe_here());
  }

  NodePtr parse_number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin) throw SyntaxError(pos_, "a number", describe_here());
    pos_ += static_cast<std::size_t>(end - begin);
    return make_node(Op::number, nullptr, nullptr, value);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

double eval_node(const Expression::Node& n, double x, double v, double t) {
  switch (n.op) {
    case Op::number: return n.value;
    case Op::var_x: return x;
    case Op::var_v: return v;
    case Op::var_t: return t;
    case Op::add: return eval_node(*n.a, x, v, t) + eval_node(*n.b, x, v, t);
    case Op::sub: return eval_node(*n.a, x, v, t) - eval_node(*n.b, x, v, t);
    case Op::mul: return eval_node(*n.a, x, v, t) * eval_node(*n.b, x, v, t);
    case Op::divide: {
      const double den = eval_node(*n.b, x, v, t);
      if (den == 0.0) throw EvalError("division by zero");
      return eval_node(*n.a, x, v, t) / den;
    }
    case Op::power: {
      const double base = eval_node(*n.a, x, v, t);
      const double exp = eval_node(*n.b, x, v, t);
      const double r = std::pow(base, exp);
      if (!std::isfinite(r))
        throw EvalError("power produced a non-finite value");
      return r;
    }
    case Op::neg: return -eval_node(*n.a, x, v, t);
    case Op::sin: return std::sin(eval_node(*n.a, x, v, t));
    case Op::cos: return std::cos(eval_node(*n.a, x, v, t));
    case Op::sqrt: {
      const double arg = eval_node(*n.a, x, v, t);
      if (arg < 0.0) throw EvalError("square root of a negative value");
      return std::sqrt(arg);
    }
    case Op::abs: return std::abs(eval_node(*n.a, x, v, t));
  }
  throw EvalError("corrupt expression node");
}

void print_node(std::ostream& os, const Expression::Node& n, int parent_prec) {
  const int prec = precedence(n.op);
  switch (n.op) {
    case Op::number: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << n.value;
      os << tmp.str();
      return;
    }
    case Op::var_x: os << 'x'; return;
    case Op::var_v: os << 'v'; return;
    case Op::var_t: os << 't'; return;
    case Op::sin: case Op::cos: case Op::sqrt: case Op::abs: {
      os << (n.op == Op::sin ? "sin" : n.op == Op::cos ? "cos"
             : n.op == Op::sqrt ? "sqrt" : "abs")
         << '(';
      print_node(os, *n.a, 0);
      os << ')';
      return;
    }
    case Op::neg: {
      const bool parens = prec < parent_prec;
      if (parens) os << '(';
      os << '-';
      print_node(os, *n.a, prec);
      if (parens) os << ')';
      return;
    }
    default: break;
  }
  // Binary operators: parenthesize when binding looser than the context.
  // Associativity is encoded in the child context below: the reassociable
  // side gets the operator's own precedence, the other side one higher.
  const bool parens = prec < parent_prec;
  if (parens) os << '(';
  const char* sym = n.op == Op::add ? " + " : n.op == Op::sub ? " - "
                    : n.op == Op::mul ? "*" : n.op == Op::divide ? "/" : "^";
  const int left_ctx = (n.op == Op::power) ? prec + 1 : prec;
  const int right_ctx = (n.op == Op::power) ? prec : prec + 1;
  print_node(os, *n.a, left_ctx);
  os << sym;
  print_node(os, *n.b, right_ctx);
  if (parens) os << ')';
}

bool nodes_equal(const Expression::Node& a, const Expression::Node& b) {
  if (a.op != b.op) return false;
  if (a.op == Op::number) return a.value == b.value;
  if (a.a && (!b.a || !nodes_equal(*a.a, *b.a))) return false;
  if (!a.a && b.a) return false;
  if (a.b && (!b.b || !nodes_equal(*a.b, *b.b))) return false;
  if (!a.b && b.b) return false;
  return true;
}

bool node_uses_time(const Expression::Node& n) {
  if (n.op == Op::var_t) return true;
  if (n.a && node_uses_time(*n.a)) return true;
  if (n.b && node_uses_time(*n.b)) return true;
  return false;
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Parser parser(text);
  return Expression(parser.parse());
}

double Expression::eval(double x, double v, double t) const {
  return eval_node(*root_, x, v, t);
}

std::string Expression::str() const {
  std::ostringstream os;
  print_node(os, *root_, 0);
  return os.str();
}

bool Expression::equals(const Expression& other) const {
  return nodes_equal(*root_, *other.root_);
}

bool Expression::uses_time() const { return node_uses_time(*root_); }

VectorField Expression::as_field() const {
  VectorField f;
  f.uses_time = uses_time();
  const auto root = root_;
  f.accel = [root](double x, double v, double t) { return eval_node(*root, x, v, t); };
  return f;
}

}  // namespace chatter
