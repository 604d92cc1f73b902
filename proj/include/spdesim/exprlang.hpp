#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spdesim/errors.hpp"

namespace spdesim::exprlang {

// Builtin scalar functions.
enum class Func { sin, cos, exp, ln, sqrt, abs, tanh };

const char* func_name(Func f);

// Parse-tree node. Children are owned by value; tree depth is capped at
// kMaxDepth by the parser, so recursion over a Node is bounded.
struct Node {
  enum class Kind { number, variable, constant_pi, negate, add, sub, mul, div, pow, call };
  Kind kind = Kind::number;
  double number = 0.0;
  int var_index = -1;   // for Kind::variable, index into the declared set
  Func func = Func::sin;
  std::vector<Node> children;
};

bool structurally_equal(const Node& a, const Node& b);

inline constexpr int kMaxDepth = 256;

// An immutable arithmetic expression over a declared variable set.
//
// Grammar: numeric literals, declared variables, `pi`, binary `+ - * / ^`
// (with `^` right-associative and binding tighter than unary minus, which
// binds tighter than `* /`, which bind tighter than `+ -`), parentheses,
// and calls sin/cos/exp/ln/sqrt/abs/tanh.
//
// Evaluation flattens the tree once into a postorder program; ln/sqrt of a
// negative argument, division by zero and pow producing NaN raise
// Errc::eval_domain instead of propagating NaN.
class Expr {
public:
  Expr() = default;

  static Expr parse(std::string_view src, std::vector<std::string> variables);

  // Arguments align with the declared variable order.
  double eval(std::span<const double> args) const;
  // Convenience for the common one-variable case.
  double eval(double x) const { return eval(std::span<const double>(&x, 1)); }

  // Parenthesized text form; parse(str(), vars) rebuilds an identical tree.
  std::string str() const;

  bool empty() const { return impl_ == nullptr; }
  const Node& root() const;
  const std::vector<std::string>& variables() const;

private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace spdesim::exprlang
