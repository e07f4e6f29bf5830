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

#include <array>
#include <cmath>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "derivnet/cost.hpp"
#include "oracles.hpp"

using namespace derivnet;

namespace {

Jet<double> random_jet(JetSpec s, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Jet<double> j(s);
  for (std::size_t i = 0; i < j.size(); ++i)
    j[i] = u(rng);
  return j;
}

// A smooth v(x1, x2) as a jet centered at x.
Jet<double> v_jet(JetSpec s, double x1, double x2) {
  const Jet<double> a = Jet<double>::variable(s, x1, 0), b = Jet<double>::variable(s, x2, 1);
  return sin(a) * cos(0.5 * b) + a * b * b;
}

Jet<double> g_jet(JetSpec s, double x1, double x2) {
  const Jet<double> a = Jet<double>::variable(s, x1, 0), b = Jet<double>::variable(s, x2, 1);
  return tanh(a - b) + 0.25 * a * a;
}

using Span = std::span<const Jet<double>>;

} // namespace

TEST(DirectCost, Examples) {
  const JetSpec u2{1, 2};
  const Jet<double> out(u2, std::vector<double>{0.5, 0.1, 0.3});
  EXPECT_EQ(direct_local_cost<double>(Span(&out, 1), Span(&out, 1), 2), 0.0);

  const Jet<double> n0(JetSpec{1, 0}, std::vector<double>{1.25});
  const Jet<double> f0(JetSpec{1, 0}, std::vector<double>{0.75});
  EXPECT_EQ(direct_local_cost<double>(Span(&n0, 1), Span(&f0, 1), 0), 0.25);

  const Jet<double> n1(JetSpec{1, 1}, std::vector<double>{1.1, 0.7});
  const Jet<double> f1(JetSpec{1, 1}, std::vector<double>{1.0, 0.5});
  EXPECT_NEAR(direct_local_cost<double>(Span(&n1, 1), Span(&f1, 1), 1), 0.05, 1e-15);
}

TEST(DirectCost, ValueTermCountedOnce) {
  const JetSpec u1{1, 1};
  const std::array<Jet<double>, 2> out{Jet<double>(u1, std::vector<double>{1.0, 0.0}),
                                       Jet<double>(u1, std::vector<double>{1.0, 0.0})};
  const std::array<Jet<double>, 2> tgt{Jet<double>(u1, std::vector<double>{0.0, 0.0}),
                                       Jet<double>(u1, std::vector<double>{0.0, 0.0})};
  EXPECT_EQ(direct_local_cost<double>(out, tgt, 1), 1.0);
}

TEST(DirectCost, HigherOrdersUseRawDerivatives) {
  // Taylor coefficient mismatch c at order k is a derivative mismatch k! c.
  Jet<double> n(JetSpec{1, 4}), f(JetSpec{1, 4});
  n[4] = 1.0 / 24.0;
  EXPECT_NEAR(direct_local_cost<double>(Span(&n, 1), Span(&f, 1), 4), 1.0, 1e-15);
  EXPECT_EQ(direct_local_cost<double>(Span(&n, 1), Span(&f, 1), 3), 0.0);
}

TEST(DirectCost, DegreeTooLowThrows) {
  const Jet<double> n(JetSpec{1, 1});
  EXPECT_THROW(direct_local_cost<double>(Span(&n, 1), Span(&n, 1), 2), usage_error);
}

TEST(DirectCost, AdjointMatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  const JetSpec s{1, 4};
  std::vector<Jet<double>> out{random_jet(s, rng), random_jet(s, rng)}, tgt{random_jet(s, rng), random_jet(s, rng)};
  std::vector<Jet<double>> bar{Jet<double>(s), Jet<double>(s)};
  direct_local_cost_adjoint<double>(out, tgt, 4, 1.0, bar);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t c = 0; c < s.size(); ++c) {
      const auto phi = [&](double h) {
        auto o = out;
        o[i][c] += h;
        return direct_local_cost<double>(o, tgt, 4);
      };
      EXPECT_NEAR(bar[i][c], oracle::diff4(phi, 1e-3), 1e-8);
    }
}

TEST(PoissonResidual, ManufacturedSolutionVanishes) {
  for (int s = 0; s <= 4; ++s) {
    const JetSpec vs{2, s + 2};
    const std::array<double, 2> x{0.31, -0.42};
    const Jet<double> v = v_jet(vs, x[0], x[1]);
    const Jet<double> a = Jet<double>::variable(vs, x[0], 0), b = Jet<double>::variable(vs, x[1], 1);
    const Jet<double> u = v * (Jet<double>::constant(vs, 1.0) - a * a - b * b);
    const Jet<double> g = derive(derive(u, 0), 0) + derive(derive(u, 1), 1);
    const Jet<double> V = poisson_residual_jet(v, x, g);
    ASSERT_EQ(V.degree(), s);
    for (std::size_t i = 0; i < V.size(); ++i)
      EXPECT_NEAR(V[i], 0.0, 1e-12) << "s=" << s << " i=" << i;
  }
}

TEST(PoissonResidual, SimpleCases) {
  const std::array<double, 2> origin{0.0, 0.0};
  const Jet<double> V0 = poisson_residual_jet(Jet<double>(JetSpec{2, 4}), origin, Jet<double>(JetSpec{2, 2}));
  for (std::size_t i = 0; i < V0.size(); ++i)
    EXPECT_EQ(V0[i], 0.0);
  const Jet<double> V1 =
      poisson_residual_jet(Jet<double>::constant(JetSpec{2, 2}, 1.0), origin, Jet<double>(JetSpec{2, 0}));
  EXPECT_EQ(V1[0], -4.0);
  EXPECT_THROW(poisson_residual_jet(Jet<double>(JetSpec{2, 3}), origin, Jet<double>(JetSpec{2, 0})), usage_error);
  EXPECT_THROW(poisson_residual_jet(Jet<double>(JetSpec{2, 1}), origin, Jet<double>(JetSpec{2, 0})), usage_error);
}

TEST(PoissonResidual, JetDerivativesMatchShiftedResiduals) {
  const std::array<double, 2> x{0.2, 0.35};
  const int s = 4;
  const Jet<double> V = poisson_residual_jet(v_jet(JetSpec{2, s + 2}, x[0], x[1]), x, g_jet(JetSpec{2, s}, x[0], x[1]));
  const auto residual_at = [](double p, double q) {
    const std::array<double, 2> y{p, q};
    return poisson_residual_jet(v_jet(JetSpec{2, 2}, p, q), y, g_jet(JetSpec{2, 0}, p, q))[0];
  };
  for (int k = 1; k <= s; ++k) {
    const auto along1 = [&](oracle::real t) { return static_cast<oracle::real>(residual_at(static_cast<double>(t), x[1])); };
    const auto along2 = [&](oracle::real t) { return static_cast<oracle::real>(residual_at(x[0], static_cast<double>(t))); };
    const double d1 = static_cast<double>(oracle::derivative(along1, x[0], k, 0.05L));
    const double d2 = static_cast<double>(oracle::derivative(along2, x[1], k, 0.05L));
    EXPECT_LT(oracle::rel_err(derivative_of(V, {k, 0}), d1, 1e-2), 1e-3) << "k=" << k;
    EXPECT_LT(oracle::rel_err(derivative_of(V, {0, k}), d2, 1e-2), 1e-3) << "k=" << k;
  }
}

TEST(PoissonResidual, AdjointDotProduct) {
  std::mt19937_64 rng(2);
  const std::array<double, 2> x{-0.3, 0.6};
  for (int s = 0; s <= 4; ++s) {
    const Jet<double> v = random_jet(JetSpec{2, s + 2}, rng), Vbar = random_jet(JetSpec{2, s}, rng);
    const Jet<double> zero_g(JetSpec{2, s});
    const Jet<double> V = poisson_residual_jet(v, x, zero_g);
    const Jet<double> vbar = poisson_residual_adjoint(Vbar, x);
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < V.size(); ++i)
      lhs += V[i] * Vbar[i];
    for (std::size_t i = 0; i < v.size(); ++i)
      rhs += v[i] * vbar[i];
    EXPECT_NEAR(lhs, rhs, 1e-12) << "s=" << s;
  }
}

TEST(PdeCost, Examples) {
  EXPECT_EQ(pde_local_cost(Jet<double>(JetSpec{2, 4}), 4), 0.0);
  std::mt19937_64 rng(3);
  const Jet<double> V = random_jet(JetSpec{2, 4}, rng);
  EXPECT_EQ(pde_local_cost(V, 0), V[0] * V[0]);
  EXPECT_EQ(pde_local_cost(Jet<double>::constant(JetSpec{2, 4}, 1.0), 4), 1.0);
  Jet<double> mixed(JetSpec{2, 2});
  mixed[index_of(mixed.spec(), {1, 1})] = 5.0;
  EXPECT_EQ(pde_local_cost(mixed, 2), 0.0);
  Jet<double> pure(JetSpec{2, 2});
  pure[index_of(pure.spec(), {0, 2})] = 0.5;
  EXPECT_EQ(pde_local_cost(pure, 2), 1.0);
}

TEST(PdeCost, AdjointMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  const Jet<double> V = random_jet(JetSpec{2, 4}, rng);
  const Jet<double> bar = pde_local_cost_adjoint(V, 4, 1.0);
  for (std::size_t c = 0; c < V.size(); ++c) {
    const auto phi = [&](double h) {
      Jet<double> W = V;
      W[c] += h;
      return pde_local_cost(W, 4);
    };
    EXPECT_NEAR(bar[c], oracle::diff4(phi, 1e-3), 1e-8);
  }
}

TEST(CostProperty, NestedOrders) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const Jet<double> V = random_jet(JetSpec{2, 4}, rng);
    const std::vector<Jet<double>> o{random_jet(JetSpec{1, 4}, rng), random_jet(JetSpec{1, 4}, rng)};
    const std::vector<Jet<double>> f{random_jet(JetSpec{1, 4}, rng), random_jet(JetSpec{1, 4}, rng)};
    for (int s = 1; s <= 4; ++s) {
      EXPECT_LE(pde_local_cost(V, s - 1), pde_local_cost(V, s));
      EXPECT_LE(direct_local_cost<double>(o, f, s - 1), direct_local_cost<double>(o, f, s));
    }
  }
}

TEST(TotalCost, Mean) {
  EXPECT_EQ(total_cost<double>(std::vector<double>{2, 4}), 3.0);
  EXPECT_EQ(total_cost<double>(std::vector<double>{0.7}), 0.7);
  EXPECT_THROW(total_cost<double>(std::vector<double>{}), usage_error);
  const std::vector<double> a{0.1, 0.2, 0.3, 1e-9}, b{0.1, 0.2, 0.3, 1e-9};
  EXPECT_EQ(total_cost<double>(a), total_cost<double>(b));
}

TEST(CostSpecTest, Validation) {
  EXPECT_THROW((CostSpec{TaskKind::direct, 5}).validate(2), usage_error);
  EXPECT_THROW((CostSpec{TaskKind::poisson, 2}).validate(5), usage_error);
  EXPECT_THROW((CostSpec{TaskKind::direct, 1, DirectionPolicy::fixed_axes, {0, 3}}).validate(2), usage_error);
  EXPECT_EQ((CostSpec{TaskKind::poisson, 4}).lane_spec(), (JetSpec{2, 6}));
  EXPECT_EQ((CostSpec{TaskKind::direct, 0}).lanes_per_pattern(), 1u);
  EXPECT_EQ((CostSpec{TaskKind::direct, 3, DirectionPolicy::random_pair, {}}).lanes_per_pattern(), 2u);
}

// Brute-force union of the multi-indices of v reached by the pure
// derivatives of V, read off the residual formula term by term.
namespace {
int enumerate_distinct(int s) {
  std::set<std::pair<int, int>> seen;
  auto add = [&](int a, int b, int axis) { seen.insert(axis == 0 ? std::pair{a, b} : std::pair{b, a}); };
  for (int axis = 0; axis < 2; ++axis)
    for (int k = 0; k <= s; ++k) {
      for (int j = 0; j <= std::min(k, 2); ++j) {
        add(k - j + 2, 0, axis); // phi v_aa: phi is quadratic along the axis
        add(k - j, 2, axis);     // phi v_bb
      }
      add(k + 1, 0, axis); // x_a v_a
      if (k >= 1)
        add(k, 0, axis);
      add(k, 1, axis); // x_b v_b: x_b is constant along the axis
      add(k, 0, axis); // v
    }
  return static_cast<int>(seen.size());
}
} // namespace

TEST(Accounting, EquivalentMultipliers) {
  EXPECT_EQ(equivalent_multiplier(CostSpec{TaskKind::direct, 0}), 1);
  EXPECT_EQ(equivalent_multiplier(CostSpec{TaskKind::direct, 4, DirectionPolicy::fixed_axes, {0, 1}}), 9);
  EXPECT_EQ(equivalent_multiplier(CostSpec{TaskKind::direct, 4, DirectionPolicy::random_pair, {}}), 9);
  EXPECT_EQ(equivalent_multiplier(CostSpec{TaskKind::direct, 2, DirectionPolicy::fixed_axes, {0, 1}}), 5);
  EXPECT_EQ(equivalent_multiplier(CostSpec{TaskKind::poisson, 4}), 5);
  EXPECT_EQ(equivalent_multiplier(CostSpec{TaskKind::poisson, 0}), 1);
}

TEST(Accounting, DistinctDerivativesMatchEnumeration) {
  for (int s = 0; s <= 4; ++s)
    EXPECT_EQ(poisson_distinct_derivatives(s), enumerate_distinct(s)) << "s=" << s;
  EXPECT_EQ(poisson_distinct_derivatives(0), 5);
  EXPECT_EQ(poisson_distinct_derivatives(4), 25);
}
