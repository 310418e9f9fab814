#include "nodalab/expression.h"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nodalab/error.h"

namespace nodalab {

enum class Op { constant, variable, add, sub, mul, div, pow, neg, sin, cos, tan, exp, log, sqrt, abs };

struct Expression::Node {
  Op op;
  double value = 0.0;
  std::size_t index = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_const(double v) { return std::make_shared<Expression::Node>(Expression::Node{Op::constant, v, 0, {}, {}}); }
NodePtr make_var(std::size_t i) { return std::make_shared<Expression::Node>(Expression::Node{Op::variable, 0, i, {}, {}}); }

bool is_const(const NodePtr& n, double v) { return n->op == Op::constant && n->value == v; }

// Builders fold constants and drop neutral elements so that derivatives and
// polynomial coefficients stay small.
NodePtr make(Op op, NodePtr a, NodePtr b = nullptr) {
  if (a->op == Op::constant && (!b || b->op == Op::constant)) {
    const double x = a->value, y = b ? b->value : 0.0;
    switch (op) {
      case Op::add: return make_const(x + y);
      case Op::sub: return make_const(x - y);
      case Op::mul: return make_const(x * y);
      case Op::div: if (y != 0.0) return make_const(x / y); break;
      case Op::pow: return make_const(std::pow(x, y));
      case Op::neg: return make_const(-x);
      default: break;
    }
  }
  switch (op) {
    case Op::add:
      if (is_const(a, 0)) return b;
      if (is_const(b, 0)) return a;
      break;
    case Op::sub:
      if (is_const(b, 0)) return a;
      if (is_const(a, 0)) return make(Op::neg, b);
      break;
    case Op::mul:
      if (is_const(a, 0) || is_const(b, 0)) return make_const(0.0);
      if (is_const(a, 1)) return b;
      if (is_const(b, 1)) return a;
      break;
    case Op::div:
      if (is_const(a, 0)) return make_const(0.0);
      if (is_const(b, 1)) return a;
      break;
    case Op::pow:
      if (is_const(b, 0)) return make_const(1.0);
      if (is_const(b, 1)) return a;
      break;
    case Op::neg:
      if (a->op == Op::neg) return a->a;
      break;
    default:
      break;
  }
  return std::make_shared<Expression::Node>(Expression::Node{op, 0, 0, std::move(a), std::move(b)});
}

double eval(const Expression::Node& n, std::span<const double> v) {
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::variable: return v[n.index];
    case Op::add: return eval(*n.a, v) + eval(*n.b, v);
    case Op::sub: return eval(*n.a, v) - eval(*n.b, v);
    case Op::mul: return eval(*n.a, v) * eval(*n.b, v);
    case Op::div: return eval(*n.a, v) / eval(*n.b, v);
    case Op::pow: {
      const double base = eval(*n.a, v);
      const double e = eval(*n.b, v);
      return std::pow(base, e);
    }
    case Op::neg: return -eval(*n.a, v);
    case Op::sin: return std::sin(eval(*n.a, v));
    case Op::cos: return std::cos(eval(*n.a, v));
    case Op::tan: return std::tan(eval(*n.a, v));
    case Op::exp: return std::exp(eval(*n.a, v));
    case Op::log: return std::log(eval(*n.a, v));
    case Op::sqrt: return std::sqrt(eval(*n.a, v));
    case Op::abs: return std::abs(eval(*n.a, v));
  }
  return 0.0;
}

bool depends(const NodePtr& n, std::size_t var) {
  if (!n) return false;
  if (n->op == Op::variable) return n->index == var;
  return depends(n->a, var) || depends(n->b, var);
}

bool has_variables(const NodePtr& n) {
  if (!n) return false;
  if (n->op == Op::variable) return true;
  return has_variables(n->a) || has_variables(n->b);
}

NodePtr diff(const NodePtr& n, std::size_t var) {
  if (!depends(n, var)) return make_const(0.0);
  const NodePtr& a = n->a;
  const NodePtr& b = n->b;
  switch (n->op) {
    case Op::constant: return make_const(0.0);
    case Op::variable: return make_const(1.0);
    case Op::add: return make(Op::add, diff(a, var), diff(b, var));
    case Op::sub: return make(Op::sub, diff(a, var), diff(b, var));
    case Op::mul: return make(Op::add, make(Op::mul, diff(a, var), b), make(Op::mul, a, diff(b, var)));
    case Op::div:
      return make(Op::div, make(Op::sub, make(Op::mul, diff(a, var), b), make(Op::mul, a, diff(b, var))),
                  make(Op::mul, b, b));
    case Op::pow:
      if (!depends(b, var)) {
        return make(Op::mul, make(Op::mul, b, make(Op::pow, a, make(Op::sub, b, make_const(1.0)))), diff(a, var));
      }
      // d(a^b) = a^b (b' log a + b a' / a)
      return make(Op::mul, n,
                  make(Op::add, make(Op::mul, diff(b, var), make(Op::log, a)),
                       make(Op::div, make(Op::mul, b, diff(a, var)), a)));
    case Op::neg: return make(Op::neg, diff(a, var));
    case Op::sin: return make(Op::mul, make(Op::cos, a), diff(a, var));
    case Op::cos: return make(Op::neg, make(Op::mul, make(Op::sin, a), diff(a, var)));
    case Op::tan: return make(Op::div, diff(a, var), make(Op::mul, make(Op::cos, a), make(Op::cos, a)));
    case Op::exp: return make(Op::mul, n, diff(a, var));
    case Op::log: return make(Op::div, diff(a, var), a);
    case Op::sqrt: return make(Op::div, diff(a, var), make(Op::mul, make_const(2.0), n));
    case Op::abs: return make(Op::mul, make(Op::div, a, n), diff(a, var));
  }
  return make_const(0.0);
}

using Poly = std::vector<NodePtr>;

Poly poly_add(const Poly& p, const Poly& q, Op op) {
  Poly r(std::max(p.size(), q.size()), make_const(0.0));
  for (std::size_t k = 0; k < r.size(); ++k) {
    const NodePtr x = k < p.size() ? p[k] : make_const(0.0);
    const NodePtr y = k < q.size() ? q[k] : make_const(0.0);
    r[k] = make(op, x, y);
  }
  return r;
}

Poly poly_mul(const Poly& p, const Poly& q) {
  Poly r(p.size() + q.size() - 1, make_const(0.0));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] = make(Op::add, r[i + j], make(Op::mul, p[i], q[j]));
  }
  return r;
}

std::optional<Poly> expand(const NodePtr& n, std::size_t var) {
  if (!depends(n, var)) return Poly{n};
  switch (n->op) {
    case Op::variable: return Poly{make_const(0.0), make_const(1.0)};
    case Op::add:
    case Op::sub: {
      auto p = expand(n->a, var), q = expand(n->b, var);
      if (!p || !q) return std::nullopt;
      return poly_add(*p, *q, n->op);
    }
    case Op::mul: {
      auto p = expand(n->a, var), q = expand(n->b, var);
      if (!p || !q) return std::nullopt;
      return poly_mul(*p, *q);
    }
    case Op::div: {
      if (depends(n->b, var)) return std::nullopt;
      auto p = expand(n->a, var);
      if (!p) return std::nullopt;
      for (auto& c : *p) c = make(Op::div, c, n->b);
      return p;
    }
    case Op::neg: {
      auto p = expand(n->a, var);
      if (!p) return std::nullopt;
      for (auto& c : *p) c = make(Op::neg, c);
      return p;
    }
    case Op::pow: {
      if (has_variables(n->b)) return std::nullopt;
      const double e = eval(*n->b, {});
      if (!(e >= 0.0) || e != std::floor(e) || e > 64) return std::nullopt;
      auto base = expand(n->a, var);
      if (!base) return std::nullopt;
      Poly r{make_const(1.0)};
      for (int k = 0; k < static_cast<int>(e); ++k) r = poly_mul(r, *base);
      return r;
    }
    default:
      return std::nullopt;
  }
}

int precedence(Op op) {
  switch (op) {
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::neg: return 3;
    case Op::pow: return 4;
    default: return 5;
  }
}

void print(std::ostream& os, const NodePtr& n, const std::vector<std::string>& names, int outer) {
  const int prec = precedence(n->op);
  const bool paren = prec < outer;
  if (paren) os << '(';
  switch (n->op) {
    case Op::constant: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << n->value;
      if (n->value < 0 && outer > 1) os << '(' << tmp.str() << ')';
      else os << tmp.str();
      break;
    }
    case Op::variable: os << names[n->index]; break;
    case Op::add: print(os, n->a, names, 1); os << " + "; print(os, n->b, names, 2); break;
    case Op::sub: print(os, n->a, names, 1); os << " - "; print(os, n->b, names, 2); break;
    case Op::mul: print(os, n->a, names, 2); os << '*'; print(os, n->b, names, 3); break;
    case Op::div: print(os, n->a, names, 2); os << '/'; print(os, n->b, names, 3); break;
    case Op::pow: print(os, n->a, names, 5); os << '^'; print(os, n->b, names, 4); break;
    case Op::neg: os << '-'; print(os, n->a, names, 3); break;
    default: {
      static const char* fn[] = {"sin", "cos", "tan", "exp", "log", "sqrt", "abs"};
      os << fn[static_cast<int>(n->op) - static_cast<int>(Op::sin)] << '(';
      print(os, n->a, names, 0);
      os << ')';
      break;
    }
  }
  if (paren) os << ')';
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    throw Error(ErrorCode::parse_error,
                "expression \"" + std::string(s_) + "\" at position " + std::to_string(pos_) + ": " + what);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (eat('+')) n = make(Op::add, n, product());
      else if (eat('-')) n = make(Op::sub, n, product());
      else return n;
    }
  }
  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (eat('*')) n = make(Op::mul, n, unary());
      else if (eat('/')) n = make(Op::div, n, unary());
      else return n;
    }
  }
  NodePtr unary() {
    if (eat('-')) return make(Op::neg, unary());
    if (eat('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) return make(Op::pow, base, unary());
    return base;
  }
  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (eat('(')) {
      NodePtr n = sum();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(s_.substr(pos_));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(rest, &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      pos_ += used;
      return make_const(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name(s_.substr(start, pos_ - start));
      for (std::size_t k = 0; k < vars_.size(); ++k) {
        if (vars_[k] == name) return make_var(k);
      }
      if (name == "pi") return make_const(std::numbers::pi);
      static const std::pair<const char*, Op> fns[] = {{"sin", Op::sin}, {"cos", Op::cos},   {"tan", Op::tan},
                                                       {"exp", Op::exp}, {"log", Op::log},   {"sqrt", Op::sqrt},
                                                       {"abs", Op::abs}};
      for (const auto& [fname, op] : fns) {
        if (name == fname) {
          if (!eat('(')) fail("expected '(' after " + name);
          NodePtr arg = sum();
          if (!eat(')')) fail("expected ')'");
          return make(op, arg);
        }
      }
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(std::shared_ptr<const Node> root, std::vector<std::string> variables)
    : root_(std::move(root)), variables_(std::move(variables)) {}

Expression Expression::parse(std::string_view text, std::vector<std::string> variables) {
  NodePtr root = Parser(text, variables).parse();
  return Expression(std::move(root), std::move(variables));
}

Expression Expression::constant(double value, std::vector<std::string> variables) {
  return Expression(make_const(value), std::move(variables));
}

double Expression::evaluate(std::span<const double> values) const {
  if (values.size() != variables_.size()) throw Error(ErrorCode::dimension_mismatch, "wrong number of variables");
  return eval(*root_, values);
}

double Expression::evaluate(double value) const { return evaluate(std::span<const double>(&value, 1)); }

Expression Expression::derivative(std::size_t variable) const { return Expression(diff(root_, variable), variables_); }

bool Expression::depends_on(std::size_t variable) const { return depends(root_, variable); }

bool Expression::is_constant() const { return !has_variables(root_); }

std::optional<std::vector<Expression>> Expression::polynomial_in(std::size_t variable) const {
  auto p = expand(root_, variable);
  if (!p) return std::nullopt;
  std::vector<Expression> out;
  for (auto& c : *p) out.push_back(Expression(c, variables_));
  return out;
}

std::string Expression::to_string() const {
  std::ostringstream os;
  print(os, root_, variables_, 0);
  return os.str();
}

Expression operator+(const Expression& a, const Expression& b) {
  return Expression(make(Op::add, a.root_, b.root_), a.variables_);
}
Expression operator-(const Expression& a, const Expression& b) {
  return Expression(make(Op::sub, a.root_, b.root_), a.variables_);
}
Expression operator*(const Expression& a, const Expression& b) {
  return Expression(make(Op::mul, a.root_, b.root_), a.variables_);
}
Expression operator/(const Expression& a, const Expression& b) {
  return Expression(make(Op::div, a.root_, b.root_), a.variables_);
}

double evaluate_constant(std::string_view text) {
  return Expression::parse(text, {}).evaluate(std::span<const double>{});
}

}  // namespace nodalab
