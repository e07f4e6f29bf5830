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

/// @file cost.hpp
/// Local and total costs with derivative terms.
///
/// Direct approximation: for order s and directions i,
///   e_s = (N - f)^2 + sum_i sum_{k=1..s} (d^k N/dx_i^k - d^k f/dx_i^k)^2.
/// The value term is counted once per pattern.
///
/// Poisson on the unit disk with u = v * (1 - x1^2 - x2^2): the residual
///   V = phi * lap(v) - 4 x1 v_1 - 4 x2 v_2 - 4 v - g
/// is assembled as a jet, so its own derivatives come for free, and
///   e_s = V^2 + sum_{i=1,2} sum_{k=1..s} (d^k V/dx_i^k)^2.
/// Every term enters with weight 1.

#ifndef DERIVNET_COST_HPP
#define DERIVNET_COST_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "derivnet/errors.hpp"
#include "derivnet/jet.hpp"

namespace derivnet {

enum class TaskKind { direct, poisson };
enum class DirectionPolicy { fixed_axes, random_pair };

inline const char *name(TaskKind k) { return k == TaskKind::direct ? "direct" : "poisson"; }

inline constexpr int kMaxCostOrder = 4;

struct CostSpec {
  TaskKind task = TaskKind::direct;
  int order = 0;
  DirectionPolicy policy = DirectionPolicy::fixed_axes;
  /// Axes used with fixed_axes.
  std::vector<int> axes{0, 1};

  void validate(int input_dim) const {
    detail::require(order >= 0 && order <= kMaxCostOrder, "cost: order must be in 0..4");
    if (task == TaskKind::poisson) {
      detail::require(input_dim == 2, "cost: the Poisson task needs two inputs");
      return;
    }
    if (policy == DirectionPolicy::fixed_axes) {
      detail::require(!axes.empty(), "cost: fixed_axes needs at least one axis");
      for (int a : axes)
        detail::require(a >= 0 && a < input_dim, "cost: axis out of range");
    } else {
      detail::require(input_dim >= 2, "cost: random pairs need two or more inputs");
    }
  }

  /// Spec of the network-output jet each lane carries.
  JetSpec lane_spec() const {
    return task == TaskKind::direct ? JetSpec{1, order} : JetSpec{2, order + 2};
  }

  /// Jet lanes per pattern: one per direction for direct s>0, else one.
  std::size_t lanes_per_pattern() const {
    if (task == TaskKind::poisson || order == 0)
      return 1;
    return policy == DirectionPolicy::random_pair ? 2 : axes.size();
  }
};

/// One training or test point with its targets.
///
/// Direct task: `directions` holds the axes of the pure derivatives and
/// `targets[i]` the univariate jet of f along directions[i] (degree >= s).
/// Poisson task: `targets[0]` is the bivariate jet of the source g.
struct Pattern {
  std::vector<double> x;
  std::vector<int> directions;
  std::vector<Jet<double>> targets;
};

// ---------------------------------------------------------------------------
// Direct approximation

template <class T>
T direct_local_cost(std::span<const Jet<T>> out, std::span<const Jet<T>> tgt, int s) {
  detail::require(!out.empty() && out.size() == tgt.size(), "direct cost: one output jet per target jet");
  detail::require(s >= 0 && s <= kMaxCostOrder, "direct cost: order must be in 0..4");
  for (std::size_t i = 0; i < out.size(); ++i)
    detail::require(out[i].spec().arity == 1 && tgt[i].spec().arity == 1 && out[i].degree() >= s &&
                        tgt[i].degree() >= s,
                    "direct cost: jets must be univariate of degree >= s");
  const T d0 = out[0][0] - tgt[0][0];
  T e = d0 * d0;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (int k = 1; k <= s; ++k) {
      const T d = static_cast<T>(factorial(k)) * (out[i][k] - tgt[i][k]);
      e += d * d;
    }
  return e;
}

/// d e_s / d out-coefficients, scaled by `scale`, accumulated into `bar`.
template <class T>
void direct_local_cost_adjoint(std::span<const Jet<T>> out, std::span<const Jet<T>> tgt, int s, T scale,
                               std::span<Jet<T>> bar) {
  bar[0][0] += scale * T(2) * (out[0][0] - tgt[0][0]);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (int k = 1; k <= s; ++k) {
      const T f = static_cast<T>(factorial(k));
      bar[i][k] += scale * T(2) * f * f * (out[i][k] - tgt[i][k]);
    }
}

// ---------------------------------------------------------------------------
// Poisson residual

namespace detail {

struct ResidualCoefficients {
  Jet<double> phi, x1, x2;
};

inline ResidualCoefficients residual_coefficients(std::span<const double> x, int s) {
  const JetSpec js{2, s};
  ResidualCoefficients rc{Jet<double>(js), Jet<double>::variable(js, x[0], 0), Jet<double>::variable(js, x[1], 1)};
  rc.phi = Jet<double>::constant(js, 1.0) - rc.x1 * rc.x1 - rc.x2 * rc.x2;
  return rc;
}

} // namespace detail

/// V as a bivariate jet of degree s, from v of degree s+2 and g of degree >= s,
/// all centered at x.
template <class T>
Jet<T> poisson_residual_jet(const Jet<T> &v, std::span<const double> x, const Jet<T> &g) {
  detail::require(x.size() == 2, "residual: point must be 2D");
  detail::require(v.spec().arity == 2 && g.spec().arity == 2, "residual: jets must be bivariate");
  const int s = v.degree() - 2;
  detail::require(s >= 0, "residual: v needs degree >= 2");
  detail::require(g.degree() >= s, "residual: source jet degree too low");
  const auto rc = detail::residual_coefficients(x, s);
  const Jet<T> phi = rc.phi.cast<T>(), x1 = rc.x1.cast<T>(), x2 = rc.x2.cast<T>();
  const Jet<T> v1 = derive(v, 0), v2 = derive(v, 1);
  const Jet<T> lap = derive(v1, 0) + derive(v2, 1);
  return phi * lap - T(4) * (x1 * truncate(v1, s)) - T(4) * (x2 * truncate(v2, s)) - T(4) * truncate(v, s) -
         truncate(g, s);
}

/// Adjoint of poisson_residual_jet with respect to v (the map is affine in v).
template <class T> Jet<T> poisson_residual_adjoint(const Jet<T> &Vbar, std::span<const double> x) {
  const int s = Vbar.degree();
  detail::require(s + 2 <= kMaxJetDegree, "residual adjoint: degree too high");
  const auto rc = detail::residual_coefficients(x, s);
  const Jet<T> phi = rc.phi.cast<T>(), x1 = rc.x1.cast<T>(), x2 = rc.x2.cast<T>();
  const Jet<T> lap_bar = mul_adjoint(Vbar, phi);
  const Jet<T> v1_bar = derive_adjoint(lap_bar, 0) + extend(T(-4) * mul_adjoint(Vbar, x1), s + 1);
  const Jet<T> v2_bar = derive_adjoint(lap_bar, 1) + extend(T(-4) * mul_adjoint(Vbar, x2), s + 1);
  return derive_adjoint(v1_bar, 0) + derive_adjoint(v2_bar, 1) + extend(T(-4) * Vbar, s + 2);
}

template <class T> T pde_local_cost(const Jet<T> &V, int s) {
  detail::require(V.spec().arity == 2, "pde cost: residual jet must be bivariate");
  detail::require(s >= 0 && s <= kMaxCostOrder && V.degree() >= s, "pde cost: residual degree below order");
  T e = V[0] * V[0];
  for (int k = 1; k <= s; ++k) {
    const T f = static_cast<T>(factorial(k));
    const T a = f * V.coeff({k, 0}), b = f * V.coeff({0, k});
    e += a * a + b * b;
  }
  return e;
}

/// d e_s / dV scaled by `scale`; a jet of V's spec.
template <class T> Jet<T> pde_local_cost_adjoint(const Jet<T> &V, int s, T scale) {
  Jet<T> bar(V.spec());
  bar[0] = scale * T(2) * V[0];
  for (int k = 1; k <= s; ++k) {
    const T f2 = static_cast<T>(factorial(k) * factorial(k));
    const std::size_t ia = index_of(V.spec(), {k, 0}), ib = index_of(V.spec(), {0, k});
    bar[ia] = scale * T(2) * f2 * V[ia];
    bar[ib] = scale * T(2) * f2 * V[ib];
  }
  return bar;
}

/// Arithmetic mean, summed in index order.
template <class T> T total_cost(std::span<const T> local) {
  detail::require(!local.empty(), "total cost: no local values");
  T sum = T(0);
  for (T v : local)
    sum += v;
  return sum / static_cast<T>(local.size());
}

// ---------------------------------------------------------------------------
// Equivalent parameter accounting

/// Distinct derivatives of v entering the Poisson cost of order s, v itself
/// included. Found from the sparsity of the residual adjoint at a generic point.
inline int poisson_distinct_derivatives(int s) {
  detail::require(s >= 0 && s <= kMaxCostOrder, "order must be in 0..4");
  const std::array<double, 2> x{0.3141, -0.2718};
  const JetSpec vs{2, s};
  std::vector<bool> used(JetSpec{2, s + 2}.size(), false);
  std::vector<MultiIndex> tracked{{0, 0}};
  for (int k = 1; k <= s; ++k) {
    tracked.push_back({k, 0});
    tracked.push_back({0, k});
  }
  for (const MultiIndex &m : tracked) {
    Jet<double> e(vs);
    e[index_of(vs, m)] = 1.0;
    const Jet<double> vbar = poisson_residual_adjoint(e, x);
    for (std::size_t i = 0; i < vbar.size(); ++i)
      if (vbar[i] != 0.0)
        used[i] = true;
  }
  return static_cast<int>(std::count(used.begin(), used.end(), true));
}

/// Trained quantities per grid point, normalized so that the classical cost
/// counts 1: N = multiplier * M.
inline int equivalent_multiplier(const CostSpec &spec) {
  if (spec.task == TaskKind::direct)
    return 1 + static_cast<int>(spec.order == 0 ? 0 : spec.lanes_per_pattern()) * spec.order;
  return static_cast<int>(std::lround(poisson_distinct_derivatives(spec.order) /
                                      static_cast<double>(poisson_distinct_derivatives(0))));
}

} // namespace derivnet

#endif
