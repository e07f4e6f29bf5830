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

/// @file optimizer.hpp
/// Resilient backpropagation with weight backtracking, no step bounds,
/// weight clamping and periodic resurrection of steps that reached zero.

#ifndef DERIVNET_OPTIMIZER_HPP
#define DERIVNET_OPTIMIZER_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "derivnet/errors.hpp"
#include "derivnet/network.hpp"

namespace derivnet {

struct RpropConfig {
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double delta0 = 2e-4;
  double clamp = 20.0;
  double resurrect_value = 1e-6;
  int resurrect_period = 1000;
  /// Revert the previous update on a sign change (and forget that gradient).
  /// Off: the step shrinks but the move still follows the current sign.
  bool backtracking = true;

  void validate() const {
    detail::require(eta_plus > 1.0 && eta_minus > 0.0 && eta_minus < 1.0,
                    "rprop: need eta_plus > 1 > eta_minus > 0");
    detail::require(delta0 > 0.0 && clamp > 0.0 && resurrect_value > 0.0 && resurrect_period > 0,
                    "rprop: delta0, clamp, resurrect value and period must be positive");
  }
};

template <class T> struct RpropState {
  std::vector<T> step;
  std::vector<T> prev_grad;
  std::vector<T> prev_update;
  long epoch = 0;
};

template <class T> RpropState<T> rprop_init(std::size_t n, const RpropConfig &cfg) {
  cfg.validate();
  detail::require(n > 0, "rprop: empty parameter set");
  RpropState<T> s;
  s.step.assign(n, static_cast<T>(cfg.delta0));
  s.prev_grad.assign(n, T(0));
  s.prev_update.assign(n, T(0));
  return s;
}

/// One update of `params` in place. `clamp_mask[i] != 0` marks entries kept
/// inside [-clamp, clamp]. Arithmetic runs in T, so single-precision steps
/// can underflow to exactly zero and then stop moving.
template <class T>
void rprop_step(RpropState<T> &state, std::span<const T> grad, std::span<T> params,
                std::span<const std::uint8_t> clamp_mask, const RpropConfig &cfg) {
  const std::size_t n = state.step.size();
  detail::require(grad.size() == n && params.size() == n && clamp_mask.size() == n,
                  "rprop: gradient, parameter and state lengths differ");
  const T up = static_cast<T>(cfg.eta_plus), down = static_cast<T>(cfg.eta_minus);
  const T hi = static_cast<T>(cfg.clamp);
  for (std::size_t i = 0; i < n; ++i) {
    const T g = grad[i];
    const T prod = g * state.prev_grad[i];
    T delta;
    if (prod > T(0)) {
      state.step[i] *= up;
      delta = g > T(0) ? -state.step[i] : state.step[i];
      state.prev_grad[i] = g;
    } else if (prod < T(0)) {
      state.step[i] *= down;
      if (cfg.backtracking) {
        delta = -state.prev_update[i];
        state.prev_grad[i] = T(0);
      } else {
        delta = g > T(0) ? -state.step[i] : state.step[i];
        state.prev_grad[i] = g;
      }
    } else {
      delta = g > T(0) ? -state.step[i] : (g < T(0) ? state.step[i] : T(0));
      state.prev_grad[i] = g;
    }
    T v = params[i] + delta;
    if (clamp_mask[i])
      v = std::clamp(v, -hi, hi);
    // Record what actually moved so a later backtrack returns exactly here.
    state.prev_update[i] = v - params[i];
    params[i] = v;
  }
  ++state.epoch;
}

template <class T>
void rprop_step(RpropState<T> &state, std::span<const T> grad, Params<T> &params, const RpropConfig &cfg) {
  rprop_step<T>(state, grad, params.values(), params.clamp_mask(), cfg);
}

/// Steps that are exactly zero become `resurrect_value`.
template <class T> void rprop_resurrect(RpropState<T> &state, const RpropConfig &cfg) {
  const T v = static_cast<T>(cfg.resurrect_value);
  for (T &s : state.step)
    if (s == T(0))
      s = v;
}

/// True after the updates that complete epochs period, 2*period, ...
template <class T> bool rprop_resurrect_due(const RpropState<T> &state, const RpropConfig &cfg) {
  return state.epoch > 0 && state.epoch % cfg.resurrect_period == 0;
}

template <class T> std::size_t count_nonzero_steps(const RpropState<T> &state) {
  return static_cast<std::size_t>(std::count_if(state.step.begin(), state.step.end(), [](T s) { return s > T(0); }));
}

} // namespace derivnet

#endif
