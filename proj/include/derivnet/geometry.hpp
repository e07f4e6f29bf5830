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

/// @file geometry.hpp
/// Training and test grids.
///
/// Interior points come from a Cartesian lattice of spacing lambda anchored
/// at the origin, turned by a random plane rotation, shifted by U[-lambda/4,
/// lambda/4] per axis and clipped to the domain, keeping only points at least
/// lambda/2 away from the boundary. Surface points are equally spaced on the
/// boundary with spacing tau.

#ifndef DERIVNET_GEOMETRY_HPP
#define DERIVNET_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "derivnet/errors.hpp"

namespace derivnet {

enum class DomainKind { box2d, disk2d, ball5d };

inline const char *name(DomainKind k) {
  switch (k) {
  case DomainKind::box2d:
    return "box2d";
  case DomainKind::disk2d:
    return "disk2d";
  case DomainKind::ball5d:
    return "ball5d";
  }
  return "?";
}

inline DomainKind parse_domain(const std::string &s) {
  if (s == "box2d")
    return DomainKind::box2d;
  if (s == "disk2d")
    return DomainKind::disk2d;
  if (s == "ball5d")
    return DomainKind::ball5d;
  throw usage_error("unknown domain '" + s + "' (expected box2d, disk2d or ball5d)");
}

/// [-1,1]^2, the unit disk, or the unit ball in R^5.
struct Domain {
  DomainKind kind = DomainKind::box2d;

  int dim() const noexcept { return kind == DomainKind::ball5d ? 5 : 2; }

  /// Signed distance to the boundary, positive inside.
  double inset(std::span<const double> x) const {
    if (kind == DomainKind::box2d)
      return 1.0 - std::max(std::abs(x[0]), std::abs(x[1]));
    double r2 = 0;
    for (double v : x)
      r2 += v * v;
    return 1.0 - std::sqrt(r2);
  }
  bool contains(std::span<const double> x) const { return inset(x) >= 0.0; }

  /// Radius of the smallest origin-centered ball holding the domain.
  double circumradius() const { return kind == DomainKind::box2d ? std::numbers::sqrt2 : 1.0; }

  /// Surface tau used when none is given: lambda, or 1.6 lambda in 5D.
  double default_tau_factor() const { return kind == DomainKind::ball5d ? 1.6 : 1.0; }
};

struct GridSpec {
  double lambda = 0.1;
  double tau = 0.0; ///< 0 selects the domain default
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(std::isfinite(lambda) && lambda > 0.0, "grid: lambda must be positive");
    detail::require(std::isfinite(tau) && tau >= 0.0, "grid: tau must be positive");
  }
  double effective_tau(const Domain &d) const { return tau > 0.0 ? tau : d.default_tau_factor() * lambda; }
};

using Point = std::vector<double>;

struct Grid {
  Domain domain;
  GridSpec spec;
  std::vector<Point> interior;
  std::vector<Point> surface;

  int dim() const noexcept { return domain.dim(); }
  std::size_t size() const noexcept { return interior.size() + surface.size(); }

  /// Interior points first, then surface points.
  std::vector<Point> points() const {
    std::vector<Point> all(interior);
    all.insert(all.end(), surface.begin(), surface.end());
    return all;
  }
};

namespace detail {

template <class Rng> Eigen::VectorXd random_unit(int dim, Rng &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i)
      v[i] = n(rng);
  } while (v.norm() < 1e-12);
  return v.normalized();
}

} // namespace detail

/// The rotation in span(u, w) taking unit vector u to unit vector w, identity
/// on the orthogonal complement.
inline Eigen::MatrixXd rotation_between(const Eigen::VectorXd &u, const Eigen::VectorXd &w) {
  detail::require(u.size() == w.size() && u.size() >= 2, "rotation: vectors must share a dimension >= 2");
  const auto n = u.size();
  const double c = std::clamp(u.dot(w), -1.0, 1.0);
  Eigen::VectorXd v = w - c * u;
  const double vn = v.norm();
  if (vn < 1e-12) {
    detail::require(c > 0.0, "rotation: antipodal vectors define no unique plane");
    return Eigen::MatrixXd::Identity(n, n);
  }
  v /= vn;
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  return Eigen::MatrixXd::Identity(n, n) + s * (v * u.transpose() - u * v.transpose()) +
         (c - 1.0) * (u * u.transpose() + v * v.transpose());
}

/// Rotation from one isotropic random unit vector to another.
template <class Rng> Eigen::MatrixXd random_rotation(int dim, Rng &rng) {
  detail::require(dim >= 2, "rotation: dimension must be >= 2");
  const Eigen::VectorXd u = detail::random_unit(dim, rng);
  Eigen::VectorXd w = detail::random_unit(dim, rng);
  while (std::abs(u.dot(w)) > 1.0 - 1e-9)
    w = detail::random_unit(dim, rng);
  return rotation_between(u, w);
}

/// Number of surface points for spacing tau.
inline std::size_t surface_count(const Domain &d, double tau) {
  detail::require(std::isfinite(tau) && tau > 0.0, "surface: tau must be positive");
  switch (d.kind) {
  case DomainKind::box2d:
    return 4 * static_cast<std::size_t>(std::max(1.0, std::floor(2.0 / tau)));
  case DomainKind::disk2d:
    return static_cast<std::size_t>(std::max(1.0, std::floor(2.0 * std::numbers::pi / tau)));
  case DomainKind::ball5d: {
    // |S^4| = 8 pi^2 / 3 over the area pi^2 (tau/2)^4 / 2 of a 4-ball of radius tau/2.
    const double n = 256.0 / (3.0 * std::pow(tau, 4));
    return static_cast<std::size_t>(std::max(1.0, std::round(std::min(n, 1e7))));
  }
  }
  return 0;
}

/// Riesz-type repulsion on the unit sphere: each iteration moves every point
/// along its tangential force by gamma * h * F_i / max|F| and projects back.
inline void relax_on_sphere(std::vector<Eigen::VectorXd> &pts, double h, int iterations) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  if (n < 2)
    return;
  const auto dim = pts[0].size();
  Eigen::MatrixXd P(n, dim), F(n, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    P.row(i) = pts[static_cast<std::size_t>(i)].transpose();
  const Eigen::Index block = 256;
  Eigen::ArrayXXd W;
  for (int it = 0; it < iterations; ++it) {
    // F_i = sum_j w_ij (p_i - p_j) with w_ij = |p_i - p_j|^-6, in row blocks.
    for (Eigen::Index r0 = 0; r0 < n; r0 += block) {
      const Eigen::Index rows = std::min(block, n - r0);
      W = (2.0 - 2.0 * (P.middleRows(r0, rows) * P.transpose()).array()).max(1e-12).cube().inverse();
      for (Eigen::Index i = 0; i < rows; ++i)
        W(i, r0 + i) = 0.0;
      F.middleRows(r0, rows) = W.rowwise().sum().matrix().asDiagonal() * P.middleRows(r0, rows) -
                               W.matrix() * P;
    }
    double fmax = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double radial = F.row(i).dot(P.row(i));
      F.row(i) -= radial * P.row(i);
      fmax = std::max(fmax, F.row(i).norm());
    }
    if (fmax <= 0.0)
      break;
    const double gamma = 0.5 * (1.0 - static_cast<double>(it) / iterations) + 0.05;
    P += (gamma * h / fmax) * F;
    P.rowwise().normalize();
  }
  for (Eigen::Index i = 0; i < n; ++i)
    pts[static_cast<std::size_t>(i)] = P.row(i).transpose();
}

inline constexpr int kSphereRelaxIterations = 100;

template <class Rng> std::vector<Point> surface_points(const Domain &d, double tau, Rng &rng) {
  const std::size_t n = surface_count(d, tau);
  std::vector<Point> out;
  out.reserve(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (d.kind) {
  case DomainKind::box2d: {
    // Perimeter arclength t in [0, 8), starting at (-1,-1) counter-clockwise.
    const double spacing = 8.0 / static_cast<double>(n);
    const double phase = unit(rng) * spacing;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = std::fmod(phase + spacing * static_cast<double>(i), 8.0);
      const int side = std::min(3, static_cast<int>(t / 2.0));
      const double a = t - 2.0 * side - 1.0;
      switch (side) {
      case 0:
        out.push_back({a, -1.0});
        break;
      case 1:
        out.push_back({1.0, a});
        break;
      case 2:
        out.push_back({-a, 1.0});
        break;
      default:
        out.push_back({-1.0, -a});
        break;
      }
    }
    break;
  }
  case DomainKind::disk2d: {
    const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
    const double phase = unit(rng) * step;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = phase + step * static_cast<double>(i);
      out.push_back({std::cos(t), std::sin(t)});
    }
    break;
  }
  case DomainKind::ball5d: {
    std::vector<Eigen::VectorXd> pts;
    for (std::size_t i = 0; i < n; ++i)
      pts.push_back(detail::random_unit(5, rng));
    relax_on_sphere(pts, tau, kSphereRelaxIterations);
    for (const auto &p : pts)
      out.emplace_back(p.data(), p.data() + p.size());
    break;
  }
  }
  return out;
}

/// Interior lattice points only.
template <class Rng> std::vector<Point> interior_points(const Domain &d, double lambda, Rng &rng) {
  const int dim = d.dim();
  const Eigen::MatrixXd R = random_rotation(dim, rng);
  std::uniform_real_distribution<double> jitter(-lambda / 4.0, lambda / 4.0);
  Eigen::VectorXd shift(dim);
  for (int i = 0; i < dim; ++i)
    shift[i] = jitter(rng);
  const long half = static_cast<long>(std::ceil((d.circumradius() + lambda) / lambda));
  detail::require(std::pow(2.0 * half + 1.0, dim) < 5e8, "grid: lambda too small for this domain");
  std::vector<Point> out;
  std::vector<long> idx(dim, -half);
  Eigen::VectorXd q(dim), p(dim);
  for (;;) {
    for (int i = 0; i < dim; ++i)
      q[i] = static_cast<double>(idx[i]) * lambda;
    p.noalias() = R * q;
    p += shift;
    const std::span<const double> ps(p.data(), static_cast<std::size_t>(dim));
    if (d.inset(ps) >= 0.5 * lambda)
      out.emplace_back(p.data(), p.data() + dim);
    int k = 0;
    while (k < dim && ++idx[k] > half)
      idx[k++] = -half;
    if (k == dim)
      break;
  }
  return out;
}

template <class Rng> Grid generate_grid(const Domain &d, const GridSpec &spec, Rng &rng) {
  spec.validate();
  Grid g;
  g.domain = d;
  g.spec = spec;
  g.interior = interior_points(d, spec.lambda, rng);
  g.surface = surface_points(d, spec.effective_tau(d), rng);
  if (g.size() == 0)
    throw numeric_error("grid: no points for lambda=" + std::to_string(spec.lambda), -1);
  return g;
}

/// Uses spec.seed for its own generator.
inline Grid generate_grid(const Domain &d, const GridSpec &spec) {
  std::mt19937_64 rng(spec.seed);
  return generate_grid(d, spec, rng);
}

/// lambda_start, then lambda_{n+1} = lambda_n (1/(1-shrink))^(1/d) while
/// below lambda_end, closed by lambda_end itself.
inline std::vector<double> grid_series(const Domain &d, double lambda_start, double lambda_end,
                                       double shrink = 0.1) {
  detail::require(lambda_start > 0.0 && lambda_start < lambda_end, "grid series: need 0 < start < end");
  detail::require(shrink > 0.0 && shrink < 1.0, "grid series: shrink must be in (0,1)");
  const double ratio = std::pow(1.0 / (1.0 - shrink), 1.0 / d.dim());
  std::vector<double> out{lambda_start};
  while (out.back() * ratio < lambda_end * (1.0 - 1e-9))
    out.push_back(out.back() * ratio);
  out.push_back(lambda_end);
  return out;
}

/// Text export: one header per section, then one point per row.
inline void write_grid(std::ostream &os, const Grid &g) {
  const auto section = [&](const std::vector<Point> &pts, const char *kind) {
    os << "# dim=" << g.dim() << " lambda=" << g.spec.lambda << " kind=" << kind << '\n';
    os << std::setprecision(17);
    for (const Point &p : pts) {
      for (std::size_t i = 0; i < p.size(); ++i)
        os << (i ? " " : "") << p[i];
      os << '\n';
    }
    os << std::setprecision(6);
  };
  section(g.interior, "interior");
  section(g.surface, "surface");
}

} // namespace derivnet

#endif
