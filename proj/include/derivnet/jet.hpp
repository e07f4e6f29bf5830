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

/// @file jet.hpp
/// Truncated multivariate Taylor jets in one or two directions.
///
/// A jet stores the Taylor coefficients c_a = (d^a f)/a! of a scalar quantity
/// up to a total degree of 6. With this normalization a product of two jets
/// is a plain truncated convolution; raw derivatives are recovered with
/// derivative_of(). Coefficients are laid out in graded lexicographic order:
/// total order ascending, and within one total order n the bivariate indices
/// run (n,0), (n-1,1), ..., (0,n). Truncating a jet to a lower degree is
/// therefore a prefix of its coefficient array.

#ifndef DERIVNET_JET_HPP
#define DERIVNET_JET_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "derivnet/errors.hpp"

namespace derivnet {

inline constexpr int kMaxJetDegree = 6;
inline constexpr std::size_t kMaxJetCoeffs = 28;

constexpr std::size_t coefficient_count(int arity, int degree) noexcept {
  return arity == 1 ? static_cast<std::size_t>(degree + 1)
                    : static_cast<std::size_t>((degree + 1) * (degree + 2) / 2);
}

struct JetSpec {
  int arity = 1;  ///< number of differentiation directions, 1 or 2
  int degree = 0; ///< maximum total derivative order, 0..6

  constexpr std::size_t size() const noexcept {
    return coefficient_count(arity, degree);
  }
  constexpr bool valid() const noexcept {
    return (arity == 1 || arity == 2) && degree >= 0 && degree <= kMaxJetDegree;
  }
  friend constexpr bool operator==(const JetSpec &, const JetSpec &) = default;
};

inline void validate(const JetSpec &spec) {
  detail::require(spec.valid(), "jet spec: arity must be 1 or 2 and degree in 0..6");
}

/// Exponents per direction; `b` stays 0 for univariate jets.
struct MultiIndex {
  int a = 0;
  int b = 0;

  constexpr int order() const noexcept { return a + b; }
  constexpr int along(int axis) const noexcept { return axis == 0 ? a : b; }
  friend constexpr bool operator==(const MultiIndex &, const MultiIndex &) = default;
};

constexpr double factorial(int n) noexcept {
  double r = 1.0;
  for (int i = 2; i <= n; ++i)
    r *= i;
  return r;
}

constexpr double factorial(const MultiIndex &m) noexcept {
  return factorial(m.a) * factorial(m.b);
}

constexpr bool contains(const JetSpec &spec, const MultiIndex &m) noexcept {
  if (m.a < 0 || m.b < 0 || m.order() > spec.degree)
    return false;
  return spec.arity == 2 || m.b == 0;
}

/// Position of `m` in the graded lexicographic layout.
constexpr std::size_t index_unchecked(int arity, const MultiIndex &m) noexcept {
  if (arity == 1)
    return static_cast<std::size_t>(m.a);
  const int n = m.order();
  return static_cast<std::size_t>(n * (n + 1) / 2 + m.b);
}

inline std::size_t index_of(const JetSpec &spec, const MultiIndex &m) {
  detail::require(contains(spec, m), "multi-index outside jet spec");
  return index_unchecked(spec.arity, m);
}

inline MultiIndex multi_index_at(const JetSpec &spec, std::size_t i) {
  detail::require(i < spec.size(), "coefficient index outside jet spec");
  if (spec.arity == 1)
    return {static_cast<int>(i), 0};
  int n = 0;
  while (static_cast<std::size_t>((n + 1) * (n + 2) / 2) <= i)
    ++n;
  const int b = static_cast<int>(i) - n * (n + 1) / 2;
  return {n - b, b};
}

/// One term c_out += x_left * y_right of a truncated product.
struct ProductTerm {
  std::uint8_t out;
  std::uint8_t left;
  std::uint8_t right;
};

/// One term of the Taylor recurrence for y = f(z) with y' = g * z':
/// y_out += weight * z_z * g_g.
struct ChainTerm {
  std::uint8_t out;
  std::uint8_t z;
  std::uint8_t g;
  double weight;
};

/// Index tables shared by every jet of one spec.
class JetTables {
public:
  static const JetTables &get(const JetSpec &spec) {
    validate(spec);
    static const std::array<JetTables, 2 * (kMaxJetDegree + 1)> all = [] {
      std::array<JetTables, 2 * (kMaxJetDegree + 1)> t;
      for (int arity = 1; arity <= 2; ++arity)
        for (int d = 0; d <= kMaxJetDegree; ++d)
          t[(arity - 1) * (kMaxJetDegree + 1) + d] = JetTables(JetSpec{arity, d});
      return t;
    }();
    return all[(spec.arity - 1) * (kMaxJetDegree + 1) + spec.degree];
  }

  JetTables() = default;

  JetSpec spec;
  std::vector<MultiIndex> indices;
  /// Grouped by `out`; terms for out=i live in [product_begin[i], product_begin[i+1]).
  std::vector<ProductTerm> products;
  std::vector<std::size_t> product_begin;
  /// Empty group for out=0 (the constant term has no recurrence).
  std::vector<ChainTerm> chain;
  std::vector<std::size_t> chain_begin;

private:
  explicit JetTables(const JetSpec &s) : spec(s) {
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i)
      indices.push_back(multi_index_at(s, i));
    product_begin.push_back(0);
    chain_begin.push_back(0);
    for (std::size_t i = 0; i < n; ++i) {
      const MultiIndex alpha = indices[i];
      const int dir = alpha.a >= 1 ? 0 : 1;
      for (std::size_t j = 0; j < n; ++j) {
        const MultiIndex beta = indices[j];
        if (beta.a > alpha.a || beta.b > alpha.b)
          continue;
        const MultiIndex gamma{alpha.a - beta.a, alpha.b - beta.b};
        const auto k = static_cast<std::uint8_t>(index_unchecked(s.arity, gamma));
        products.push_back({static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j), k});
        if (alpha.order() > 0 && beta.along(dir) >= 1)
          chain.push_back({static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j), k,
                           static_cast<double>(beta.along(dir)) / alpha.along(dir)});
      }
      product_begin.push_back(products.size());
      chain_begin.push_back(chain.size());
    }
  }
};

template <class T> class Jet {
public:
  Jet() = default;
  explicit Jet(const JetSpec &spec) : spec_(spec) { validate(spec); }

  Jet(const JetSpec &spec, std::span<const T> coeffs) : Jet(spec) {
    detail::require(coeffs.size() == spec.size(), "jet: coefficient count does not match spec");
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      c_[i] = coeffs[i];
  }

  static Jet constant(const JetSpec &spec, T value) {
    Jet j(spec);
    j.c_[0] = value;
    return j;
  }

  /// The coordinate function along `slot` (0 or 1): value plus a unit
  /// first-order coefficient.
  static Jet variable(const JetSpec &spec, T value, int slot) {
    detail::require(slot >= 0 && slot < spec.arity, "jet: direction slot out of range");
    Jet j = constant(spec, value);
    if (spec.degree >= 1)
      j.c_[slot == 0 ? 1 : (spec.arity == 2 ? 2 : 1)] = T(1);
    return j;
  }

  const JetSpec &spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return spec_.size(); }
  int degree() const noexcept { return spec_.degree; }

  T value() const noexcept { return c_[0]; }
  T &operator[](std::size_t i) noexcept { return c_[i]; }
  const T &operator[](std::size_t i) const noexcept { return c_[i]; }
  T coeff(const MultiIndex &m) const { return c_[index_of(spec_, m)]; }

  std::span<T> coeffs() noexcept { return {c_.data(), size()}; }
  std::span<const T> coeffs() const noexcept { return {c_.data(), size()}; }

  Jet &operator+=(const Jet &o) {
    check_same(o);
    for (std::size_t i = 0; i < size(); ++i)
      c_[i] += o.c_[i];
    return *this;
  }
  Jet &operator-=(const Jet &o) {
    check_same(o);
    for (std::size_t i = 0; i < size(); ++i)
      c_[i] -= o.c_[i];
    return *this;
  }
  Jet &operator*=(T s) noexcept {
    for (std::size_t i = 0; i < size(); ++i)
      c_[i] *= s;
    return *this;
  }

  bool all_finite() const noexcept {
    for (std::size_t i = 0; i < size(); ++i)
      if (!std::isfinite(c_[i]))
        return false;
    return true;
  }

  template <class U> Jet<U> cast() const {
    Jet<U> r(spec_);
    for (std::size_t i = 0; i < size(); ++i)
      r[i] = static_cast<U>(c_[i]);
    return r;
  }

  void check_same(const Jet &o) const {
    detail::require(spec_ == o.spec_, "jet: spec mismatch");
  }

private:
  JetSpec spec_{};
  std::array<T, kMaxJetCoeffs> c_{};
};

template <class T> Jet<T> operator+(Jet<T> a, const Jet<T> &b) { return a += b; }
template <class T> Jet<T> operator-(Jet<T> a, const Jet<T> &b) { return a -= b; }
template <class T> Jet<T> operator-(Jet<T> a) { return a *= T(-1); }
template <class T> Jet<T> operator*(Jet<T> a, T s) { return a *= s; }
template <class T> Jet<T> operator*(T s, Jet<T> a) { return a *= s; }

/// Truncated product.
template <class T> Jet<T> operator*(const Jet<T> &a, const Jet<T> &b) {
  a.check_same(b);
  const JetTables &tab = JetTables::get(a.spec());
  Jet<T> r(a.spec());
  for (const ProductTerm &t : tab.products)
    r[t.out] += a[t.left] * b[t.right];
  return r;
}

/// d/dx_axis as a jet of one lower degree.
template <class T> Jet<T> derive(const Jet<T> &a, int axis) {
  const JetSpec &s = a.spec();
  detail::require(s.degree >= 1, "derive: jet of degree 0 has no derivative");
  detail::require(axis >= 0 && axis < s.arity, "derive: axis out of range");
  const JetSpec rs{s.arity, s.degree - 1};
  const JetTables &tab = JetTables::get(rs);
  Jet<T> r(rs);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    MultiIndex m = tab.indices[i];
    const int k = m.along(axis) + 1;
    (axis == 0 ? m.a : m.b) += 1;
    r[i] = static_cast<T>(k) * a[index_unchecked(s.arity, m)];
  }
  return r;
}

/// Drop every coefficient of total order above `degree`.
template <class T> Jet<T> truncate(const Jet<T> &a, int degree) {
  detail::require(degree >= 0 && degree <= a.degree(), "truncate: degree must not grow");
  const JetSpec rs{a.spec().arity, degree};
  return Jet<T>(rs, a.coeffs().first(rs.size()));
}

/// Zero-pad to a higher degree. Adjoint of truncate().
template <class T> Jet<T> extend(const Jet<T> &a, int degree) {
  detail::require(degree >= a.degree() && degree <= kMaxJetDegree, "extend: degree must not shrink");
  Jet<T> r(JetSpec{a.spec().arity, degree});
  for (std::size_t i = 0; i < a.size(); ++i)
    r[i] = a[i];
  return r;
}

/// Adjoint of derive(): maps a cotangent on d/dx_axis(x) back onto x.
template <class T> Jet<T> derive_adjoint(const Jet<T> &ybar, int axis) {
  const JetSpec &s = ybar.spec();
  detail::require(s.degree < kMaxJetDegree, "derive_adjoint: degree overflow");
  detail::require(axis >= 0 && axis < s.arity, "derive_adjoint: axis out of range");
  const JetSpec rs{s.arity, s.degree + 1};
  const JetTables &tab = JetTables::get(s);
  Jet<T> r(rs);
  for (std::size_t i = 0; i < s.size(); ++i) {
    MultiIndex m = tab.indices[i];
    const int k = m.along(axis) + 1;
    (axis == 0 ? m.a : m.b) += 1;
    r[index_unchecked(s.arity, m)] += static_cast<T>(k) * ybar[i];
  }
  return r;
}

/// Adjoint of x -> x * g with g held fixed.
template <class T> Jet<T> mul_adjoint(const Jet<T> &ybar, const Jet<T> &g) {
  ybar.check_same(g);
  const JetTables &tab = JetTables::get(g.spec());
  Jet<T> r(g.spec());
  for (const ProductTerm &t : tab.products)
    r[t.left] += ybar[t.out] * g[t.right];
  return r;
}

/// Raw partial derivative d^m f = c_m * m!.
template <class T> T derivative_of(const Jet<T> &a, const MultiIndex &m) {
  return a.coeff(m) * static_cast<T>(factorial(m));
}

// ---------------------------------------------------------------------------
// Elementary functions

/// Closed table of functions available for composition. Add new entries here
/// together with a derivative rule in elementary_derivatives().
enum class Elementary { identity, square, sigmoid, tanh, sin, cos };

inline const char *name(Elementary fn) {
  switch (fn) {
  case Elementary::identity: return "identity";
  case Elementary::square: return "square";
  case Elementary::sigmoid: return "sigmoid";
  case Elementary::tanh: return "tanh";
  case Elementary::sin: return "sin";
  case Elementary::cos: return "cos";
  }
  return "?";
}

namespace detail {

/// Coefficients (ascending powers) of P_k with f^(k) = P_k(f), for f' = q(f)
/// with q quadratic. Row k has degree k+1.
using PolyTable = std::array<std::array<double, kMaxJetDegree + 2>, kMaxJetDegree + 1>;

constexpr PolyTable derivative_polynomials(double q0, double q1, double q2) {
  PolyTable p{};
  p[0][1] = 1.0;
  for (int k = 0; k < kMaxJetDegree; ++k) {
    // P_{k+1} = P_k' * q
    std::array<double, kMaxJetDegree + 2> dp{};
    for (int i = 1; i <= k + 1; ++i)
      dp[i - 1] = i * p[k][i];
    for (int i = 0; i <= k; ++i) {
      p[k + 1][i] += dp[i] * q0;
      p[k + 1][i + 1] += dp[i] * q1;
      p[k + 1][i + 2] += dp[i] * q2;
    }
  }
  return p;
}

// sigma' = sigma - sigma^2, tanh' = 1 - tanh^2
inline constexpr PolyTable kSigmoidPolys = derivative_polynomials(0.0, 1.0, -1.0);
inline constexpr PolyTable kTanhPolys = derivative_polynomials(1.0, 0.0, -1.0);

template <class T> T eval_poly(const std::array<double, kMaxJetDegree + 2> &p, int deg, T x) {
  T r = static_cast<T>(p[deg]);
  for (int i = deg - 1; i >= 0; --i)
    r = r * x + static_cast<T>(p[i]);
  return r;
}

} // namespace detail

/// Logistic function evaluated without overflow for large |y|.
template <class T> T sigmoid(T y) {
  if (y >= T(0))
    return T(1) / (T(1) + std::exp(-y));
  const T e = std::exp(y);
  return e / (T(1) + e);
}

/// Derivatives f^(0..d)(y) of an elementary function.
template <class T>
std::array<T, kMaxJetDegree + 1> elementary_derivatives(Elementary fn, T y, int d) {
  detail::require(d >= 0 && d <= kMaxJetDegree, "elementary derivatives: order must be in 0..6");
  std::array<T, kMaxJetDegree + 1> r{};
  switch (fn) {
  case Elementary::identity:
    r[0] = y;
    if (d >= 1)
      r[1] = T(1);
    break;
  case Elementary::square:
    r[0] = y * y;
    if (d >= 1)
      r[1] = T(2) * y;
    if (d >= 2)
      r[2] = T(2);
    break;
  case Elementary::sigmoid: {
    r[0] = sigmoid(y);
    // sigma^(k)(y) = (-1)^(k+1) sigma^(k)(-y) for k >= 1; evaluating the
    // polynomials at the small branch avoids cancellation near sigma = 1.
    const T s = y > T(0) ? sigmoid(-y) : r[0];
    for (int k = 1; k <= d; ++k) {
      const T v = detail::eval_poly(detail::kSigmoidPolys[k], k + 1, s);
      r[k] = (y > T(0) && k % 2 == 0) ? -v : v;
    }
    break;
  }
  case Elementary::tanh: {
    const T t = std::tanh(y);
    r[0] = t;
    for (int k = 1; k <= d; ++k)
      r[k] = detail::eval_poly(detail::kTanhPolys[k], k + 1, t);
    break;
  }
  case Elementary::sin:
  case Elementary::cos: {
    const T s = std::sin(y), c = std::cos(y);
    const std::array<T, 4> cyc = fn == Elementary::sin ? std::array<T, 4>{s, c, -s, -c}
                                                       : std::array<T, 4>{c, -s, -c, s};
    for (int k = 0; k <= d; ++k)
      r[k] = cyc[k % 4];
    break;
  }
  }
  return r;
}

/// sigma^(0..d)(y) through the polynomial-in-sigma recurrence sigma' = sigma(1 - sigma).
template <class T> std::vector<T> sigmoid_derivs(T y, int d) {
  const auto r = elementary_derivatives(Elementary::sigmoid, y, d);
  return std::vector<T>(r.begin(), r.begin() + d + 1);
}

/// fn(a) as a truncated power series: Horner over the zero-constant part of a.
template <class T> Jet<T> compose(Elementary fn, const Jet<T> &a) {
  const int d = a.degree();
  const auto f = elementary_derivatives(fn, a.value(), d);
  Jet<T> tail = a;
  tail[0] = T(0);
  Jet<T> r = Jet<T>::constant(a.spec(), f[d] / static_cast<T>(factorial(d)));
  for (int k = d - 1; k >= 0; --k) {
    r = r * tail;
    r[0] += f[k] / static_cast<T>(factorial(k));
  }
  return r;
}

template <class T> Jet<T> sin(const Jet<T> &a) { return compose(Elementary::sin, a); }
template <class T> Jet<T> cos(const Jet<T> &a) { return compose(Elementary::cos, a); }
template <class T> Jet<T> tanh(const Jet<T> &a) { return compose(Elementary::tanh, a); }
template <class T> Jet<T> sigmoid(const Jet<T> &a) { return compose(Elementary::sigmoid, a); }
template <class T> Jet<T> square(const Jet<T> &a) { return compose(Elementary::square, a); }

} // namespace derivnet

#endif
