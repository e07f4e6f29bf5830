// Copyright 2026 The derivnet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/// @file expression.hpp
/// Small immutable expression trees evaluated on jets.

#ifndef DERIVNET_EXPRESSION_HPP
#define DERIVNET_EXPRESSION_HPP

#include <algorithm>
#include <memory>
#include <span>
#include <vector>

#include "derivnet/errors.hpp"
#include "derivnet/jet.hpp"

namespace derivnet {

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Op { variable, constant, add, mul, neg, apply };
  Op op = Op::constant;
  int index = 0;
  double value = 0.0;
  Elementary fn = Elementary::identity;
  Expr lhs, rhs;
};

namespace expr {

inline Expr var(int index) {
  detail::require(index >= 0, "expression: negative variable index");
  return std::make_shared<const ExprNode>(ExprNode{ExprNode::Op::variable, index, 0.0, Elementary::identity, {}, {}});
}

inline Expr lit(double v) {
  return std::make_shared<const ExprNode>(ExprNode{ExprNode::Op::constant, 0, v, Elementary::identity, {}, {}});
}

inline Expr add(Expr a, Expr b) {
  return std::make_shared<const ExprNode>(
      ExprNode{ExprNode::Op::add, 0, 0.0, Elementary::identity, std::move(a), std::move(b)});
}

inline Expr mul(Expr a, Expr b) {
  return std::make_shared<const ExprNode>(
      ExprNode{ExprNode::Op::mul, 0, 0.0, Elementary::identity, std::move(a), std::move(b)});
}

inline Expr neg(Expr a) {
  return std::make_shared<const ExprNode>(ExprNode{ExprNode::Op::neg, 0, 0.0, Elementary::identity, std::move(a), {}});
}

inline Expr apply(Elementary fn, Expr a) {
  return std::make_shared<const ExprNode>(ExprNode{ExprNode::Op::apply, 0, 0.0, fn, std::move(a), {}});
}

inline Expr sin(Expr a) { return apply(Elementary::sin, std::move(a)); }
inline Expr cos(Expr a) { return apply(Elementary::cos, std::move(a)); }
inline Expr tanh(Expr a) { return apply(Elementary::tanh, std::move(a)); }
inline Expr square(Expr a) { return apply(Elementary::square, std::move(a)); }
inline Expr sigmoid(Expr a) { return apply(Elementary::sigmoid, std::move(a)); }

inline Expr operator+(Expr a, Expr b) { return add(std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return mul(std::move(a), std::move(b)); }
inline Expr operator-(Expr a) { return neg(std::move(a)); }
inline Expr operator-(Expr a, Expr b) { return add(std::move(a), neg(std::move(b))); }
inline Expr operator*(double c, Expr a) { return mul(lit(c), std::move(a)); }

} // namespace expr

/// Number of inputs the tree reads: one past the largest variable index.
/// Throws usage_error on a malformed tree.
inline int expr_dim(const Expr &e) {
  detail::require(e != nullptr, "expression: null node");
  switch (e->op) {
  case ExprNode::Op::variable:
    return e->index + 1;
  case ExprNode::Op::constant:
    return 0;
  case ExprNode::Op::add:
  case ExprNode::Op::mul:
    return std::max(expr_dim(e->lhs), expr_dim(e->rhs));
  case ExprNode::Op::neg:
  case ExprNode::Op::apply:
    return expr_dim(e->lhs);
  }
  throw usage_error("expression: unknown node");
}

namespace detail {

template <class T>
Jet<T> eval_node(const Expr &e, std::span<const double> x, const JetSpec &spec, std::span<const int> directions) {
  require(e != nullptr, "expression: null node");
  switch (e->op) {
  case ExprNode::Op::variable: {
    require(static_cast<std::size_t>(e->index) < x.size(), "expression: variable index beyond point dimension");
    Jet<T> j = Jet<T>::constant(spec, static_cast<T>(x[e->index]));
    if (spec.degree >= 1)
      for (std::size_t k = 0; k < directions.size(); ++k)
        if (directions[k] == e->index)
          j[index_of(spec, k == 0 ? MultiIndex{1, 0} : MultiIndex{0, 1})] += T(1);
    return j;
  }
  case ExprNode::Op::constant:
    return Jet<T>::constant(spec, static_cast<T>(e->value));
  case ExprNode::Op::add:
    return eval_node<T>(e->lhs, x, spec, directions) + eval_node<T>(e->rhs, x, spec, directions);
  case ExprNode::Op::mul:
    return eval_node<T>(e->lhs, x, spec, directions) * eval_node<T>(e->rhs, x, spec, directions);
  case ExprNode::Op::neg:
    return -eval_node<T>(e->lhs, x, spec, directions);
  case ExprNode::Op::apply:
    return compose(e->fn, eval_node<T>(e->lhs, x, spec, directions));
  }
  throw usage_error("expression: unknown node");
}

} // namespace detail

/// Taylor jet of `e` at `x` along the coordinate axes in `directions`, one
/// axis per jet slot.
template <class T = double>
Jet<T> eval_expr_jet(const Expr &e, std::span<const double> x, const JetSpec &spec, std::span<const int> directions) {
  validate(spec);
  detail::require(directions.size() == static_cast<std::size_t>(spec.arity),
                  "expression: one direction per jet slot");
  for (int d : directions)
    detail::require(d >= 0 && static_cast<std::size_t>(d) < x.size(), "expression: direction outside point dimension");
  return detail::eval_node<T>(e, x, spec, directions);
}

/// Plain value of `e` at `x`.
inline double eval_expr(const Expr &e, std::span<const double> x) {
  const int dir = 0;
  detail::require(!x.empty(), "expression: empty point");
  return eval_expr_jet<double>(e, x, JetSpec{1, 0}, std::span<const int>(&dir, 1)).value();
}

} // namespace derivnet

#endif
