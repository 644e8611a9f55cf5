#include "flatstrip/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

#include "flatstrip/error.hpp"

namespace flatstrip {

class ExpressionParser {
 public:
  explicit ExpressionParser(const std::string& text) : text_(text) {}

  Expression run() {
    Expression e;
    e.text_ = text_;
    nodes_ = &e.nodes_;
    e.root_ = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::InvalidFormula, msg + " at offset " + std::to_string(pos_) + " in '" + text_ + "'");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  int push(Op op, int lhs = -1, int rhs = -1, std::complex<double> value = {}) {
    // fold constants so exponents like -2 stay recognizable as integers
    if (op == Op::Neg && node(lhs).op == Op::Const) return push(Op::Const, -1, -1, -node(lhs).value);
    nodes_->push_back({op, value, lhs, rhs});
    return static_cast<int>(nodes_->size()) - 1;
  }

  const Expression::Node& node(int id) const { return (*nodes_)[static_cast<std::size_t>(id)]; }

  int parse_sum() {
    int lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = push(Op::Add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = push(Op::Sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  int parse_product() {
    int lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = push(Op::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = push(Op::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (accept('-')) return push(Op::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (accept('^')) return push(Op::Pow, base, parse_unary());
    return base;
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of formula");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = parse_sum();
      expect(')');
      return inner;
    }
    if (c == '|') {
      ++pos_;
      const int inner = parse_sum();
      expect('|');
      return push(Op::Abs, inner);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < text_.size() && std::isalnum(static_cast<unsigned char>(text_[end]))) ++end;
      const std::string name = text_.substr(pos_, end - pos_);
      pos_ = end;
      if (name == "z") return push(Op::Var);
      if (name == "i") return push(Op::Const, -1, -1, {0.0, 1.0});
      if (name == "pi") return push(Op::Const, -1, -1, {std::numbers::pi, 0.0});
      const Op fn = function_op(name);
      expect('(');
      const int arg = parse_sum();
      expect(')');
      return push(fn, arg);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Op function_op(const std::string& name) const {
    if (name == "exp") return Op::Exp;
    if (name == "log") return Op::Log;
    if (name == "sqrt") return Op::Sqrt;
    if (name == "abs") return Op::Abs;
    if (name == "Re" || name == "re") return Op::Re;
    if (name == "Im" || name == "im") return Op::Im;
    if (name == "conj") return Op::Conj;
    fail("unknown identifier '" + name + "'");
  }

  int parse_number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    return push(Op::Const, -1, -1, {v, 0.0});
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  std::vector<Expression::Node>* nodes_ = nullptr;
};

Expression Expression::parse(const std::string& text) { return ExpressionParser(text).run(); }

}  // namespace flatstrip
