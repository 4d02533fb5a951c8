#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace kneser {

// Tiny arithmetic expression grammar for custom coefficient families and
// nonlinearities: numbers, one free variable, + - * / ^, parentheses and a
// fixed set of functions. No user code execution beyond this.
struct Expr {
  enum class Op {
    number, variable,
    add, sub, mul, div, pow, neg,
    sin, cos, tan, abs, exp, log, log2, sqrt, floor, ceil,
    min, max
  };
  Op op = Op::number;
  double value = 0.0;
  std::shared_ptr<const Expr> a, b;
};

using ExprPtr = std::shared_ptr<const Expr>;

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(const std::string& s) : s_(s) {}

  ExprPtr parse() {
    auto e = parse_sum();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("expression error at position " + std::to_string(pos_) + ": " +
                                msg + " in \"" + s_ + "\"");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  static ExprPtr node(Expr::Op op, ExprPtr a = nullptr, ExprPtr b = nullptr, double v = 0.0) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->value = v;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
  }

  ExprPtr parse_sum() {
    auto lhs = parse_term();
    for (;;) {
      if (eat('+'))
        lhs = node(Expr::Op::add, lhs, parse_term());
      else if (eat('-'))
        lhs = node(Expr::Op::sub, lhs, parse_term());
      else
        return lhs;
    }
  }

  ExprPtr parse_term() {
    auto lhs = parse_factor();
    for (;;) {
      if (eat('*'))
        lhs = node(Expr::Op::mul, lhs, parse_factor());
      else if (eat('/'))
        lhs = node(Expr::Op::div, lhs, parse_factor());
      else
        return lhs;
    }
  }

  ExprPtr parse_factor() {
    if (eat('-')) return node(Expr::Op::neg, parse_factor());  // -2^2 == -(2^2)
    return parse_power();
  }

  ExprPtr parse_power() {
    auto base = parse_primary();
    if (eat('^')) return node(Expr::Op::pow, base, parse_factor());  // right assoc
    return base;
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    if (eat('(')) {
      auto e = parse_sum();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  ExprPtr parse_number() {
    size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
            s_[pos_] == 'e' || s_[pos_] == 'E' ||
            ((s_[pos_] == '+' || s_[pos_] == '-') && pos_ > start &&
             (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
      ++pos_;
    try {
      size_t used = 0;
      double v = std::stod(s_.substr(start, pos_ - start), &used);
      if (used != pos_ - start) fail("malformed number");
      return node(Expr::Op::number, nullptr, nullptr, v);
    } catch (const std::logic_error&) {
      pos_ = start;
      fail("malformed number");
    }
  }

  ExprPtr parse_ident() {
    size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    std::string name = s_.substr(start, pos_ - start);
    if (name == "k" || name == "u" || name == "x") return node(Expr::Op::variable);
    if (name == "pi") return node(Expr::Op::number, nullptr, nullptr, 3.14159265358979323846);
    if (name == "e") return node(Expr::Op::number, nullptr, nullptr, 2.71828182845904523536);

    static const std::pair<const char*, Expr::Op> unary_fns[] = {
        {"sin", Expr::Op::sin},   {"cos", Expr::Op::cos},   {"tan", Expr::Op::tan},
        {"abs", Expr::Op::abs},   {"exp", Expr::Op::exp},   {"log", Expr::Op::log},
        {"log2", Expr::Op::log2}, {"sqrt", Expr::Op::sqrt}, {"floor", Expr::Op::floor},
        {"ceil", Expr::Op::ceil}};
    for (auto& [fname, op] : unary_fns) {
      if (name == fname) {
        if (!eat('(')) fail("expected '(' after function name");
        auto arg = parse_sum();
        if (!eat(')')) fail("expected ')'");
        return node(op, arg);
      }
    }
    if (name == "min" || name == "max" || name == "pow") {
      if (!eat('(')) fail("expected '(' after function name");
      auto a = parse_sum();
      if (!eat(',')) fail("expected ','");
      auto b = parse_sum();
      if (!eat(')')) fail("expected ')'");
      Expr::Op op = name == "min" ? Expr::Op::min : name == "max" ? Expr::Op::max : Expr::Op::pow;
      return node(op, a, b);
    }
    fail("unknown identifier '" + name + "'");
  }

  const std::string& s_;
  size_t pos_ = 0;
};

}  // namespace detail

inline ExprPtr parse_expression(const std::string& text) {
  return detail::ExprParser(text).parse();
}

template <class Real>
Real eval_expression(const Expr& e, const Real& var) {
  using std::abs;
  using std::ceil;
  using std::cos;
  using std::exp;
  using std::floor;
  using std::log;
  using std::log2;
  using std::max;
  using std::min;
  using std::pow;
  using std::sin;
  using std::sqrt;
  using std::tan;
  switch (e.op) {
    case Expr::Op::number: return Real(e.value);
    case Expr::Op::variable: return var;
    case Expr::Op::add: return eval_expression(*e.a, var) + eval_expression(*e.b, var);
    case Expr::Op::sub: return eval_expression(*e.a, var) - eval_expression(*e.b, var);
    case Expr::Op::mul: return eval_expression(*e.a, var) * eval_expression(*e.b, var);
    case Expr::Op::div: return eval_expression(*e.a, var) / eval_expression(*e.b, var);
    case Expr::Op::pow: return pow(eval_expression(*e.a, var), eval_expression(*e.b, var));
    case Expr::Op::neg: return -eval_expression(*e.a, var);
    case Expr::Op::sin: return sin(eval_expression(*e.a, var));
    case Expr::Op::cos: return cos(eval_expression(*e.a, var));
    case Expr::Op::tan: return tan(eval_expression(*e.a, var));
    case Expr::Op::abs: return abs(eval_expression(*e.a, var));
    case Expr::Op::exp: return exp(eval_expression(*e.a, var));
    case Expr::Op::log: return log(eval_expression(*e.a, var));
    case Expr::Op::log2: return log2(eval_expression(*e.a, var));
    case Expr::Op::sqrt: return sqrt(eval_expression(*e.a, var));
    case Expr::Op::floor: return floor(eval_expression(*e.a, var));
    case Expr::Op::ceil: return ceil(eval_expression(*e.a, var));
    case Expr::Op::min: return min(eval_expression(*e.a, var), eval_expression(*e.b, var));
    case Expr::Op::max: return max(eval_expression(*e.a, var), eval_expression(*e.b, var));
  }
  throw std::logic_error("unhandled expression node");
}

}  // namespace kneser
