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

// Reference computations for the test suites. Nothing here calls into the
// jet machinery: derivatives come from finite differences or power series.

#ifndef DERIVNET_TESTS_ORACLES_HPP
#define DERIVNET_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using real = long double;

inline real binomial(int n, int k) {
  real r = 1;
  for (int i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return r;
}

/// Central difference of order k with step h: sum_j (-1)^j C(k,j) f(x + (k/2 - j) h) / h^k.
inline real central(const std::function<real(real)> &f, real x, int k, real h) {
  if (k == 0)
    return f(x);
  real acc = 0;
  for (int j = 0; j <= k; ++j) {
    const real sign = (j % 2 == 0) ? 1 : -1;
    acc += sign * binomial(k, j) * f(x + (static_cast<real>(k) / 2 - j) * h);
  }
  return acc / std::pow(h, static_cast<real>(k));
}

/// One Richardson step on the h^2 error term.
inline real derivative(const std::function<real(real)> &f, real x, int k, real h) {
  const real a = central(f, x, k, h), b = central(f, x, k, h / 2);
  return (4 * b - a) / 3;
}

/// Mixed partial d^(a+b) f / dx^a dy^b as nested Richardson differences.
inline real mixed(const std::function<real(real, real)> &f, real x, real y, int a, int b, real h) {
  auto along_y = [&](real xs) {
    return derivative([&](real ys) { return f(xs, ys); }, y, b, h);
  };
  return derivative(along_y, x, a, h);
}

/// Derivatives of 1/(1+exp(-y)) at y up to order d via power-series reciprocal
/// of the denominator 1 + e^{-y} e^{-t}.
inline std::vector<real> logistic_derivatives(real y, int d) {
  std::vector<real> den(d + 1), rec(d + 1);
  real fact = 1;
  for (int k = 0; k <= d; ++k) {
    if (k > 0)
      fact *= k;
    den[k] = std::exp(-y) * ((k % 2 == 0) ? 1 : -1) / fact;
  }
  den[0] += 1;
  rec[0] = 1 / den[0];
  for (int n = 1; n <= d; ++n) {
    real s = 0;
    for (int j = 1; j <= n; ++j)
      s += den[j] * rec[n - j];
    rec[n] = -s / den[0];
  }
  fact = 1;
  for (int k = 1; k <= d; ++k) {
    fact *= k;
    rec[k] *= fact;
  }
  return rec;
}

/// Fourth-order central first derivative.
template <class F> double diff4(F &&f, double h) {
  return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
}

inline double rel_err(double got, double want, double floor = 1e-8) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

} // namespace oracle

#endif
