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

/// @file objective.hpp
/// Total cost E_s over a fixed batch and its exact parameter gradient.

#ifndef DERIVNET_OBJECTIVE_HPP
#define DERIVNET_OBJECTIVE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "derivnet/cost.hpp"
#include "derivnet/network.hpp"

namespace derivnet {

struct Evaluation {
  double cost = 0.0;    ///< E_s
  double mean_e0 = 0.0; ///< <e_0> over the batch
};

/// Owns the lane layout and scratch for one batch so repeated evaluation
/// (one per epoch) allocates nothing.
///
/// Local costs are summed in pattern order; the gradient comes from one
/// reverse sweep over all lanes.
template <class T> class Objective {
public:
  Objective(const NetworkConfig &cfg, CostSpec spec, std::vector<Pattern> patterns)
      : cfg_(cfg), spec_(std::move(spec)), patterns_(std::move(patterns)),
        lanes_(spec_.lanes_per_pattern()),
        prop_(cfg, spec_.lane_spec(), std::max<std::size_t>(1, patterns_.size() * lanes_)) {
    cfg_.validate();
    spec_.validate(cfg_.input_dim());
    detail::require(!patterns_.empty(), "objective: empty batch");
    for (std::size_t p = 0; p < patterns_.size(); ++p) {
      const Pattern &pat = patterns_[p];
      detail::require(pat.x.size() == static_cast<std::size_t>(cfg_.input_dim()),
                      "objective: pattern dimension mismatch");
      if (spec_.task == TaskKind::direct) {
        detail::require(pat.targets.size() >= lanes_ && pat.directions.size() >= lanes_,
                        "objective: pattern lacks targets for every direction");
        for (std::size_t i = 0; i < lanes_; ++i) {
          detail::require(pat.targets[i].degree() >= spec_.order, "objective: target jet degree below order");
          const int dir = spec_.order == 0 ? 0 : pat.directions[i];
          prop_.seed_lane(p * lanes_ + i, std::span<const double>(pat.x), std::span<const int>(&dir, 1));
          targets_.push_back(truncate(pat.targets[i], spec_.order).template cast<T>());
        }
      } else {
        detail::require(!pat.targets.empty() && pat.targets[0].spec().arity == 2 &&
                            pat.targets[0].degree() >= spec_.order,
                        "objective: Poisson pattern needs a bivariate source jet");
        const std::array<int, 2> dirs{0, 1};
        prop_.seed_lane(p, std::span<const double>(pat.x), std::span<const int>(dirs));
        targets_.push_back(truncate(pat.targets[0], spec_.order).template cast<T>());
      }
    }
    adjoint_.resize(1, static_cast<Eigen::Index>(prop_.coefficients() * prop_.lanes()));
    local_.resize(patterns_.size());
    e0_.resize(patterns_.size());
  }

  const CostSpec &spec() const noexcept { return spec_; }
  std::size_t patterns() const noexcept { return patterns_.size(); }
  const std::vector<double> &local_costs() const noexcept { return local_; }
  const std::vector<double> &local_e0() const noexcept { return e0_; }

  /// Cost and, when `grad` is non-empty, its gradient (overwritten).
  Evaluation evaluate(const Params<T> &params, std::span<T> grad = {}) {
    prop_.forward(params);
    const std::size_t Q = prop_.lanes();
    const std::size_t M = patterns_.size();
    const bool want_grad = !grad.empty();
    adjoint_.setZero();
    const T scale = T(1) / static_cast<T>(M);
    const JetSpec ls = spec_.lane_spec();

    std::vector<Jet<T>> out(lanes_, Jet<T>(ls)), bar(lanes_, Jet<T>(ls));
    for (std::size_t p = 0; p < M; ++p) {
      for (std::size_t i = 0; i < lanes_; ++i)
        for (std::size_t c = 0; c < ls.size(); ++c)
          out[i][c] = prop_.output(c, p * lanes_ + i);
      if (spec_.task == TaskKind::direct) {
        const std::span<const Jet<T>> o(out), t(targets_.data() + p * lanes_, lanes_);
        local_[p] = static_cast<double>(direct_local_cost<T>(o, t, spec_.order));
        const double d0 = static_cast<double>(out[0][0]) - static_cast<double>(t[0][0]);
        e0_[p] = d0 * d0;
        if (want_grad) {
          for (auto &b : bar)
            b = Jet<T>(ls);
          direct_local_cost_adjoint<T>(o, t, spec_.order, scale, bar);
          for (std::size_t i = 0; i < lanes_; ++i)
            for (std::size_t c = 0; c < ls.size(); ++c)
              adjoint_(0, c * Q + p * lanes_ + i) = bar[i][c];
        }
      } else {
        const Jet<double> v = out[0].template cast<double>();
        const Jet<double> g = targets_[p].template cast<double>();
        const Jet<double> V = poisson_residual_jet(v, patterns_[p].x, g);
        local_[p] = pde_local_cost(V, spec_.order);
        e0_[p] = V[0] * V[0];
        if (want_grad) {
          const Jet<double> Vbar = pde_local_cost_adjoint(V, spec_.order, 1.0 / static_cast<double>(M));
          const Jet<double> vbar = poisson_residual_adjoint(Vbar, patterns_[p].x);
          for (std::size_t c = 0; c < ls.size(); ++c)
            adjoint_(0, c * Q + p) = static_cast<T>(vbar[c]);
        }
      }
    }
    Evaluation ev;
    ev.cost = total_cost<double>(local_);
    ev.mean_e0 = total_cost<double>(e0_);
    if (!std::isfinite(ev.cost)) {
      std::ptrdiff_t bad = -1;
      for (std::size_t p = 0; p < M && bad < 0; ++p)
        if (!std::isfinite(local_[p]))
          bad = static_cast<std::ptrdiff_t>(p);
      throw numeric_error("non-finite cost at pattern " + std::to_string(bad), bad);
    }
    if (want_grad)
      prop_.backward(params, adjoint_, grad);
    return ev;
  }

  BatchPropagator<T> &propagator() noexcept { return prop_; }

private:
  NetworkConfig cfg_;
  CostSpec spec_;
  std::vector<Pattern> patterns_;
  std::size_t lanes_;
  BatchPropagator<T> prop_;
  std::vector<Jet<T>> targets_;
  typename BatchPropagator<T>::Block adjoint_;
  std::vector<double> local_;
  std::vector<double> e0_;
};

template <class T> struct CostGradient {
  double cost = 0.0;
  std::vector<T> grad;
};

/// E_s over `batch` and dE_s/dparams, aligned with Params::values().
template <class T>
CostGradient<T> cost_and_gradient(const Params<T> &params, std::span<const Pattern> batch, const CostSpec &spec) {
  detail::require(!batch.empty(), "cost_and_gradient: empty batch");
  Objective<T> obj(params.config(), spec, std::vector<Pattern>(batch.begin(), batch.end()));
  CostGradient<T> r;
  r.grad.assign(params.size(), T(0));
  r.cost = obj.evaluate(params, r.grad).cost;
  return r;
}

} // namespace derivnet

#endif
