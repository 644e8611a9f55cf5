#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "flatstrip/jet.hpp"

namespace flatstrip {

/// Parsed closed-form formula in the complex variable z.
///
/// Grammar: numbers, `z`, `i`, `pi`, `+ - * / ^`, parentheses, `|expr|`, and
/// the functions Re, Im, exp, log, sqrt, abs, conj. Evaluation is templated on
/// the value type so the same tree yields values (std::complex) and exact first
/// derivatives (Jet).
class Expression {
 public:
  enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sqrt, Abs, Re, Im, Conj };

  struct Node {
    Op op = Op::Const;
    std::complex<double> value{};
    int lhs = -1;
    int rhs = -1;
  };

  /// Throws Error(InvalidFormula) on malformed input.
  static Expression parse(const std::string& text);

  const std::string& text() const { return text_; }

  template <typename T>
  T eval(const T& z) const {
    return eval_node<T>(root_, z);
  }

 private:
  template <typename T>
  T eval_node(int id, const T& z) const;

  template <typename T>
  static T constant(std::complex<double> c);

  friend class ExpressionParser;

  std::string text_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

template <>
inline std::complex<double> Expression::constant<std::complex<double>>(std::complex<double> c) {
  return c;
}
template <>
inline Jet<double> Expression::constant<Jet<double>>(std::complex<double> c) {
  return Jet<double>::constant(c);
}

template <typename T>
T Expression::eval_node(int id, const T& z) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  switch (n.op) {
    case Op::Const: return constant<T>(n.value);
    case Op::Var: return z;
    case Op::Add: return eval_node<T>(n.lhs, z) + eval_node<T>(n.rhs, z);
    case Op::Sub: return eval_node<T>(n.lhs, z) - eval_node<T>(n.rhs, z);
    case Op::Mul: return eval_node<T>(n.lhs, z) * eval_node<T>(n.rhs, z);
    case Op::Div: return eval_node<T>(n.lhs, z) / eval_node<T>(n.rhs, z);
    case Op::Pow: {
      const Node& e = nodes_[static_cast<std::size_t>(n.rhs)];
      const T base = eval_node<T>(n.lhs, z);
      // small integer exponents expand to products so that |z|^2 stays exact
      if (e.op == Op::Const && e.value.imag() == 0.0 && e.value.real() == std::floor(e.value.real()) &&
          std::abs(e.value.real()) <= 16.0) {
        const int k = static_cast<int>(std::abs(e.value.real()));
        T acc = constant<T>(1.0);
        for (int m = 0; m < k; ++m) acc = acc * base;
        return e.value.real() < 0 ? constant<T>(1.0) / acc : acc;
      }
      return fs_exp(eval_node<T>(n.rhs, z) * fs_log(base));
    }
    case Op::Neg: return -eval_node<T>(n.lhs, z);
    case Op::Exp: return fs_exp(eval_node<T>(n.lhs, z));
    case Op::Log: return fs_log(eval_node<T>(n.lhs, z));
    case Op::Sqrt: return fs_sqrt(eval_node<T>(n.lhs, z));
    case Op::Abs: return fs_abs(eval_node<T>(n.lhs, z));
    case Op::Re: return fs_re(eval_node<T>(n.lhs, z));
    case Op::Im: return fs_im(eval_node<T>(n.lhs, z));
    case Op::Conj: return fs_conj(eval_node<T>(n.lhs, z));
  }
  return z;
}

}  // namespace flatstrip
