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

/// @file targets.hpp
/// Benchmark targets and training patterns.
///
///   f2d(x) = (1 - x1^2 - x2^2)/2 + 2 tanh(x1 sin(x2/2)) - sin(x1) cos(x2)
///   f5d(x) = (1 - x2^2 - x5^2)/2 + 2 tanh(x3 sin(x4/2)) - sin(x1) cos(x2)
///   u_a    = f2d * (1 - x1^2 - x2^2),   g = lap(u_a)
///
/// Indices above are 1-based; the code uses 0-based variables.

#ifndef DERIVNET_TARGETS_HPP
#define DERIVNET_TARGETS_HPP

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "derivnet/cost.hpp"
#include "derivnet/errors.hpp"
#include "derivnet/expression.hpp"
#include "derivnet/geometry.hpp"
#include "derivnet/jet.hpp"

namespace derivnet {

namespace targets {

inline Expr f2d() {
  using namespace expr;
  const Expr x1 = var(0), x2 = var(1);
  return 0.5 * (lit(1.0) - square(x1) - square(x2)) + 2.0 * tanh(x1 * sin(0.5 * x2)) - sin(x1) * cos(x2);
}

inline Expr f5d() {
  using namespace expr;
  const Expr x1 = var(0), x2 = var(1), x3 = var(2), x4 = var(3), x5 = var(4);
  return 0.5 * (lit(1.0) - square(x2) - square(x5)) + 2.0 * tanh(x3 * sin(0.5 * x4)) - sin(x1) * cos(x2);
}

/// Vanishes on the unit circle.
inline Expr phi() {
  using namespace expr;
  return lit(1.0) - square(var(0)) - square(var(1));
}

inline Expr poisson_solution() { return expr::mul(f2d(), phi()); }

} // namespace targets

/// Jet of the source g = lap(u_a) at x, bivariate along (x1, x2).
inline Jet<double> poisson_source(std::span<const double> x, const JetSpec &spec) {
  detail::require(x.size() == 2, "poisson source: point must be 2D");
  detail::require(spec.arity == 2 && spec.degree >= 0 && spec.degree <= kMaxCostOrder,
                  "poisson source: needs a bivariate spec of degree <= 4");
  static const Expr u = targets::poisson_solution();
  const std::array<int, 2> dirs{0, 1};
  const Jet<double> ua = eval_expr_jet<double>(u, x, JetSpec{2, spec.degree + 2}, dirs);
  return derive(derive(ua, 0), 0) + derive(derive(ua, 1), 1);
}

inline double exact_solution(std::span<const double> x) {
  detail::require(x.size() == 2, "exact solution: point must be 2D");
  static const Expr u = targets::poisson_solution();
  return eval_expr(u, x);
}

enum class TaskId { approx2d, approx5d, poisson2d };

inline const char *name(TaskId t) {
  switch (t) {
  case TaskId::approx2d:
    return "approx2d";
  case TaskId::approx5d:
    return "approx5d";
  case TaskId::poisson2d:
    return "poisson2d";
  }
  return "?";
}

inline TaskId parse_task(const std::string &s) {
  for (TaskId t : {TaskId::approx2d, TaskId::approx5d, TaskId::poisson2d})
    if (s == name(t))
      return t;
  throw usage_error("unknown task '" + s + "' (expected approx2d, approx5d or poisson2d)");
}

/// The five-dimensional task pairs directions uniformly over these.
inline constexpr std::array<std::pair<int, int>, 10> kAxisPairs{
    {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}}};

struct TaskDef {
  TaskId id = TaskId::approx2d;
  Domain domain;
  /// f for approximation tasks, u_a for the Poisson task.
  Expr reference;

  int dim() const { return domain.dim(); }
  bool is_poisson() const { return id == TaskId::poisson2d; }

  CostSpec cost_spec(int order) const {
    CostSpec c;
    c.order = order;
    if (id == TaskId::poisson2d) {
      c.task = TaskKind::poisson;
    } else if (id == TaskId::approx5d) {
      c.policy = DirectionPolicy::random_pair;
    }
    c.validate(dim());
    return c;
  }

  int multiplier(int order) const { return equivalent_multiplier(cost_spec(order)); }
};

inline TaskDef make_task(TaskId id) {
  switch (id) {
  case TaskId::approx2d:
    return {id, Domain{DomainKind::box2d}, targets::f2d()};
  case TaskId::approx5d:
    return {id, Domain{DomainKind::ball5d}, targets::f5d()};
  case TaskId::poisson2d:
    return {id, Domain{DomainKind::disk2d}, targets::poisson_solution()};
  }
  throw usage_error("unknown task");
}

/// Training patterns of order `order` at `points`. The five-dimensional task
/// draws one axis pair per point from `rng`.
inline std::vector<Pattern> make_patterns(const TaskDef &task, std::span<const Point> points, int order,
                                          std::mt19937_64 &rng) {
  detail::require(order >= 0 && order <= kMaxCostOrder, "patterns: order must be in 0..4");
  detail::require(expr_dim(task.reference) <= task.dim(), "patterns: target reads beyond the task dimension");
  std::vector<Pattern> out;
  out.reserve(points.size());
  const JetSpec uni{1, order};
  for (const Point &p : points) {
    detail::require(static_cast<int>(p.size()) == task.dim(), "patterns: point dimension does not match task");
    Pattern pat{p, {}, {}};
    if (task.is_poisson()) {
      pat.directions = {0, 1};
      pat.targets.push_back(poisson_source(p, JetSpec{2, order}));
    } else {
      if (task.id == TaskId::approx5d) {
        const auto [a, b] = kAxisPairs[rng() % kAxisPairs.size()];
        pat.directions = {a, b};
      } else {
        pat.directions = {0, 1};
      }
      for (int d : pat.directions)
        pat.targets.push_back(eval_expr_jet<double>(task.reference, p, uni, std::span<const int>(&d, 1)));
    }
    out.push_back(std::move(pat));
  }
  return out;
}

} // namespace derivnet

#endif
