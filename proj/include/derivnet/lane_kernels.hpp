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

/// @file lane_kernels.hpp
/// Jet kernels over a row of Q lanes stored coefficient-major: coefficient i
/// of lane q lives at [i * Q + q]. Inner loops run over q and vectorize.

#ifndef DERIVNET_LANE_KERNELS_HPP
#define DERIVNET_LANE_KERNELS_HPP

#include <cstddef>

#include "derivnet/jet.hpp"

namespace derivnet::lanes {

/// y = sigmoid(z) and g = sigmoid'(z) = y (1 - y) as jets, per lane.
///
/// Uses the Taylor recurrence of y' = g z' along the first direction in
/// which the output index is nonzero; g is refreshed right after each y_i,
/// since y_i only reads g of strictly lower total order.
template <class T>
void sigmoid_forward(const JetTables &tab, std::size_t Q, const T *z, T *y, T *g) {
  const std::size_t C = tab.indices.size();
  for (std::size_t q = 0; q < Q; ++q) {
    const T s = sigmoid(z[q]);
    y[q] = s;
    g[q] = s * (T(1) - s);
  }
  for (std::size_t i = 1; i < C; ++i) {
    T *yi = y + i * Q;
    for (std::size_t q = 0; q < Q; ++q)
      yi[q] = T(0);
    for (std::size_t t = tab.chain_begin[i]; t < tab.chain_begin[i + 1]; ++t) {
      const ChainTerm &ct = tab.chain[t];
      const T w = static_cast<T>(ct.weight);
      const T *zb = z + ct.z * Q;
      const T *gc = g + ct.g * Q;
      for (std::size_t q = 0; q < Q; ++q)
        yi[q] += w * zb[q] * gc[q];
    }
    T *gi = g + i * Q;
    for (std::size_t q = 0; q < Q; ++q)
      gi[q] = yi[q];
    for (std::size_t t = tab.product_begin[i]; t < tab.product_begin[i + 1]; ++t) {
      const ProductTerm &pt = tab.products[t];
      const T *yl = y + pt.left * Q;
      const T *yr = y + pt.right * Q;
      for (std::size_t q = 0; q < Q; ++q)
        gi[q] -= yl[q] * yr[q];
    }
  }
}

/// Adjoint of y = f(z): a perturbation dz moves y by g * dz (truncated
/// product), so zbar = ybar correlated with g.
///
/// `corrupt` halves the term linking the top-order output coefficient to the
/// first-order input coefficient of the last direction (the value coefficient
/// at degree 0); it exists only as a negative control for gradient checking.
template <class T>
void compose_adjoint(const JetTables &tab, std::size_t Q, const T *ybar, const T *g, T *zbar,
                     bool corrupt = false) {
  const std::size_t C = tab.indices.size();
  const std::size_t victim = C == 1 ? 0 : static_cast<std::size_t>(tab.spec.arity);
  for (std::size_t k = 0; k < C * Q; ++k)
    zbar[k] = T(0);
  for (const ProductTerm &pt : tab.products) {
    const T *yo = ybar + pt.out * Q;
    const T *gr = g + pt.right * Q;
    T *zl = zbar + pt.left * Q;
    if (corrupt && pt.out == C - 1 && pt.left == victim) {
      for (std::size_t q = 0; q < Q; ++q)
        zl[q] += T(0.5) * yo[q] * gr[q];
      continue;
    }
    for (std::size_t q = 0; q < Q; ++q)
      zl[q] += yo[q] * gr[q];
  }
}

} // namespace derivnet::lanes

#endif
