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

/// @file harness.hpp
/// Single training runs, evaluation, step diagnostics and gradient checks.
///
/// A run trains full batch with RProp on E_s and tracks sqrt(<e_0>) on the
/// training grid. Weights are snapshotted whenever that value improves; the
/// run stops once the running best has improved by less than the threshold
/// over the trailing window, or at the epoch cap.

#ifndef DERIVNET_HARNESS_HPP
#define DERIVNET_HARNESS_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "derivnet/cost.hpp"
#include "derivnet/errors.hpp"
#include "derivnet/geometry.hpp"
#include "derivnet/network.hpp"
#include "derivnet/objective.hpp"
#include "derivnet/optimizer.hpp"
#include "derivnet/targets.hpp"

namespace derivnet {

// ---------------------------------------------------------------------------
// Seeds

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t seed_hash(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::uint64_t p : parts)
    h = splitmix64(h ^ p);
  return h;
}

/// Seed of one repeat in a sweep; any cell can be recomputed on its own.
inline std::uint64_t repeat_seed(std::uint64_t master, std::size_t grid_index, const NetworkConfig &net, int order,
                                 int repeat) {
  return seed_hash({master, grid_index, fnv1a64(net.id()), static_cast<std::uint64_t>(order),
                    static_cast<std::uint64_t>(repeat)});
}

// Sub-streams of a run seed.
enum class Stream : std::uint64_t { grid = 1, patterns = 2, init = 3, test = 4 };

inline std::uint64_t stream_seed(std::uint64_t seed, Stream s) {
  return seed_hash({seed, static_cast<std::uint64_t>(s)});
}

// ---------------------------------------------------------------------------
// Configuration and results

struct StopRule {
  int max_epochs = 10000;
  int window = 1000;
  double threshold = 0.1; ///< relative improvement required per window

  void validate() const {
    detail::require(max_epochs > 0 && window > 0, "stop rule: epochs and window must be positive");
    detail::require(max_epochs >= window, "stop rule: max epochs must be >= window");
    detail::require(threshold > 0.0 && threshold < 1.0, "stop rule: threshold must be in (0, 1)");
  }

  /// `best[e]` is the running minimum after e updates.
  bool should_stop(std::span<const double> best) const {
    const std::size_t e = best.size() - 1;
    if (static_cast<long>(e) >= max_epochs)
      return true;
    if (e < static_cast<std::size_t>(window))
      return false;
    return best[e] > (1.0 - threshold) * best[e - window];
  }
};

struct RunConfig {
  TaskId task = TaskId::approx2d;
  NetworkConfig net{{2, 64, 64, 64, 64, 64, 64, 1}, Precision::single};
  int order = 4;
  GridSpec grid{0.45, 0.0, 0};
  StopRule stop;
  RpropConfig rprop;
  std::uint64_t seed = 1;

  void validate() const {
    const TaskDef t = make_task(task);
    net.validate();
    detail::require(net.input_dim() == t.dim(), "run: network input size does not match the task dimension");
    t.cost_spec(order);
    grid.validate();
    stop.validate();
    rprop.validate();
  }
};

struct RunResult {
  bool ok = true;
  std::string message;
  std::size_t points = 0;     ///< M
  std::size_t equivalent = 0; ///< N
  int epochs = 0;             ///< updates applied
  int best_epoch = 0;
  Params<double> best{NetworkConfig{{1, 1, 1}, Precision::double_}};
  std::vector<double> trace;       ///< sqrt(<e_0>_train) after e updates
  std::vector<std::size_t> deltas; ///< nonzero steps after each update
  double best_train_rms = std::numeric_limits<double>::infinity();
  double change_probability = 0.0; ///< mean share of weights moved per 10 epochs
  double wall_seconds = 0.0;
};

struct Metrics {
  double train_rms = 0.0;
  double test_rms = 0.0;
  double log10_ratio = 0.0;
  double max_dev = std::numeric_limits<double>::quiet_NaN(); ///< Poisson only
};

// ---------------------------------------------------------------------------
// Training

namespace detail {

template <class T>
RunResult train_impl(const RunConfig &cfg, const std::vector<Pattern> &patterns, Params<T> params,
                     const std::function<void(int, double)> &progress) {
  const auto t0 = std::chrono::steady_clock::now();
  const TaskDef task = make_task(cfg.task);
  RunResult r;
  r.points = patterns.size();
  r.equivalent = patterns.size() * static_cast<std::size_t>(task.multiplier(cfg.order));
  r.best = params.template cast<double>();

  Objective<T> obj(cfg.net, task.cost_spec(cfg.order), patterns);
  RpropState<T> state = rprop_init<T>(params.size(), cfg.rprop);
  std::vector<T> grad(params.size());
  std::vector<double> best_hist;
  best_hist.reserve(static_cast<std::size_t>(cfg.stop.max_epochs) + 1);
  r.trace.reserve(best_hist.capacity());

  const auto mask = params.clamp_mask();
  const std::size_t weights = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
  std::vector<std::uint8_t> moved(params.size(), 0);
  double prob_sum = 0.0;
  int prob_windows = 0;

  try {
    for (int e = 0;; ++e) {
      const Evaluation ev = obj.evaluate(params, grad);
      const double rms = std::sqrt(ev.mean_e0);
      r.trace.push_back(rms);
      if (rms < r.best_train_rms) {
        r.best_train_rms = rms;
        r.best_epoch = e;
        r.best = params.template cast<double>();
      }
      best_hist.push_back(r.best_train_rms);
      if (progress)
        progress(e, rms);
      if (cfg.stop.should_stop(best_hist))
        break;
      for (T g : grad)
        if (!std::isfinite(static_cast<double>(g)))
          throw numeric_error("non-finite gradient at epoch " + std::to_string(e));
      rprop_step<T>(state, grad, params, cfg.rprop);
      if (rprop_resurrect_due(state, cfg.rprop))
        rprop_resurrect(state, cfg.rprop);
      r.epochs = e + 1;
      r.deltas.push_back(count_nonzero_steps(state));
      for (std::size_t i = 0; i < moved.size(); ++i)
        moved[i] |= state.prev_update[i] != T(0) ? 1 : 0;
      if (r.epochs % 10 == 0) {
        std::size_t n = 0;
        for (std::size_t i = 0; i < moved.size(); ++i)
          n += (mask[i] && moved[i]) ? 1 : 0;
        prob_sum += static_cast<double>(n) / static_cast<double>(std::max<std::size_t>(1, weights));
        ++prob_windows;
        std::fill(moved.begin(), moved.end(), 0);
      }
    }
  } catch (const numeric_error &err) {
    r.ok = false;
    r.message = err.what();
  }
  r.change_probability = prob_windows ? prob_sum / prob_windows : 0.0;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

} // namespace detail

/// Training grid of a run, drawn from the run seed.
inline Grid run_grid(const RunConfig &cfg) {
  const TaskDef task = make_task(cfg.task);
  GridSpec gs = cfg.grid;
  gs.seed = stream_seed(cfg.seed, Stream::grid);
  return generate_grid(task.domain, gs);
}

inline std::vector<Pattern> run_patterns(const RunConfig &cfg, const Grid &grid) {
  std::mt19937_64 rng(stream_seed(cfg.seed, Stream::patterns));
  const auto pts = grid.points();
  return make_patterns(make_task(cfg.task), pts, cfg.order, rng);
}

/// Trains on explicit patterns. `progress(e, rms)` sees every tracked value.
inline RunResult train_on(const RunConfig &cfg, const std::vector<Pattern> &patterns,
                          const std::function<void(int, double)> &progress = {}) {
  cfg.validate();
  std::mt19937_64 rng(stream_seed(cfg.seed, Stream::init));
  if (cfg.net.precision == Precision::single)
    return detail::train_impl<float>(cfg, patterns, init_params<float>(cfg.net, rng), progress);
  return detail::train_impl<double>(cfg, patterns, init_params<double>(cfg.net, rng), progress);
}

inline RunResult train_run(const RunConfig &cfg, const std::function<void(int, double)> &progress = {}) {
  cfg.validate();
  return train_on(cfg, run_patterns(cfg, run_grid(cfg)), progress);
}

// ---------------------------------------------------------------------------
// Evaluation

struct TestSet {
  TaskId task = TaskId::approx2d;
  std::vector<Point> points;
  std::vector<Pattern> patterns; ///< order 0
};

inline TestSet make_test_set(TaskId id, const GridSpec &spec) {
  const TaskDef task = make_task(id);
  const Grid g = generate_grid(task.domain, spec);
  TestSet t{id, g.points(), {}};
  std::mt19937_64 rng(stream_seed(spec.seed, Stream::test));
  t.patterns = make_patterns(task, t.points, 0, rng);
  return t;
}

/// max |v(x) phi(x) - u_a(x)| over `points`.
inline double max_deviation(const std::function<double(std::span<const double>)> &v,
                            std::span<const Point> points) {
  static const Expr phi = targets::phi();
  double worst = 0.0;
  for (const Point &p : points)
    worst = std::max(worst, std::abs(v(p) * eval_expr(phi, p) - exact_solution(p)));
  return worst;
}

namespace detail {

template <class T>
Metrics evaluate_impl(const Params<T> &params, const std::vector<Pattern> &train, const TestSet &test) {
  const TaskDef task = make_task(test.task);
  const CostSpec spec = task.cost_spec(0);
  Objective<T> tr(params.config(), spec, train), te(params.config(), spec, test.patterns);
  Metrics m;
  m.train_rms = std::sqrt(tr.evaluate(params).mean_e0);
  m.test_rms = std::sqrt(te.evaluate(params).mean_e0);
  m.log10_ratio = std::log10(m.test_rms / m.train_rms);
  if (task.is_poisson())
    m.max_dev = max_deviation(
        [&](std::span<const double> x) {
          std::array<T, 2> xt{static_cast<T>(x[0]), static_cast<T>(x[1])};
          return static_cast<double>(forward<T>(params, xt));
        },
        test.points);
  return m;
}

} // namespace detail

/// Train and test metrics of `best`, evaluated in the network's precision.
/// Both sets go through the same order-0 objective.
inline Metrics evaluate(const Params<double> &best, const std::vector<Pattern> &train, const TestSet &test) {
  detail::require(!train.empty() && !test.patterns.empty(), "evaluate: empty train or test set");
  if (best.config().precision == Precision::single)
    return detail::evaluate_impl<float>(best.cast<float>(), train, test);
  return detail::evaluate_impl<double>(best, train, test);
}

// ---------------------------------------------------------------------------
// Diagnostics

/// Linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double p) {
  detail::require(!v.empty(), "quantile: empty sample");
  detail::require(p >= 0.0 && p <= 1.0, "quantile: p must be in [0, 1]");
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

struct DeltaStats {
  double min = 0.0;
  double q3low = 0.0; ///< lower 3-quantile
  double median = 0.0;
};

/// Statistics of delta_a / delta_b over the epochs both runs reached.
inline DeltaStats delta_ratio_stats(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  std::vector<double> r;
  for (std::size_t e = 0; e < std::min(a.size(), b.size()); ++e)
    if (b[e] > 0)
      r.push_back(static_cast<double>(a[e]) / static_cast<double>(b[e]));
  detail::require(!r.empty(), "delta stats: no common epochs");
  return {*std::min_element(r.begin(), r.end()), quantile(r, 1.0 / 3.0), median(r)};
}

inline double delta_median(const RunResult &r) {
  if (r.deltas.empty())
    return 0.0;
  return median(std::vector<double>(r.deltas.begin(), r.deltas.end()));
}

// ---------------------------------------------------------------------------
// Gradient check

struct GradcheckConfig {
  TaskId task = TaskId::approx2d;
  std::vector<int> layers{2, 8, 8, 1};
  int order = 4;
  int params = 50;
  int patterns = 5;
  std::uint64_t seed = 1;
  double threshold = 1e-6;
  bool corrupt = false; ///< negative control: perturb the reverse sweep
};

struct GradcheckReport {
  bool passed = false;
  double max_rel_err = 0.0;
  std::size_t worst_param = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  int params_checked = 0;
};

template <class Rng> Point random_point_in(const Domain &d, Rng &rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Point p(static_cast<std::size_t>(d.dim()));
  for (;;) {
    for (double &v : p)
      v = u(rng);
    if (d.inset(p) > 0.0)
      return p;
  }
}

/// Analytic gradient against fourth-order central differences in double.
inline GradcheckReport gradcheck(const GradcheckConfig &gc) {
  detail::require(gc.params >= 1 && gc.patterns >= 1, "gradcheck: need at least one parameter and pattern");
  const TaskDef task = make_task(gc.task);
  const NetworkConfig net{gc.layers, Precision::double_};
  net.validate();
  detail::require(net.input_dim() == task.dim(), "gradcheck: network input size does not match the task");
  std::mt19937_64 rng(gc.seed);
  std::vector<Point> pts;
  for (int i = 0; i < gc.patterns; ++i)
    pts.push_back(random_point_in(task.domain, rng));
  const auto batch = make_patterns(task, pts, gc.order, rng);
  Params<double> params = init_params<double>(net, rng);

  Objective<double> obj(net, task.cost_spec(gc.order), batch);
  std::vector<double> grad(params.size());
  obj.propagator().set_corrupt_adjoint(gc.corrupt);
  obj.evaluate(params, grad);
  obj.propagator().set_corrupt_adjoint(false);
  double gmax = 0.0;
  for (double g : grad)
    gmax = std::max(gmax, std::abs(g));

  // Every parameter when the net is small, else a random subset.
  std::vector<std::size_t> idx(params.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(idx.size(), static_cast<std::size_t>(gc.params)));

  GradcheckReport rep;
  for (std::size_t i : idx) {
    const double w0 = params.values()[i];
    const double h = 1e-3 * std::max(1.0, std::abs(w0));
    const auto cost_at = [&](double d) {
      params.values()[i] = w0 + d;
      return obj.evaluate(params).cost;
    };
    const double fd = (-cost_at(2 * h) + 8 * cost_at(h) - 8 * cost_at(-h) + cost_at(-2 * h)) / (12 * h);
    params.values()[i] = w0;
    const double err = std::abs(grad[i] - fd) / std::max({std::abs(fd), std::abs(grad[i]), 1e-6 * gmax, 1e-300});
    if (err >= rep.max_rel_err) {
      rep.max_rel_err = err;
      rep.worst_param = i;
      rep.analytic = grad[i];
      rep.numeric = fd;
    }
    ++rep.params_checked;
  }
  rep.passed = rep.max_rel_err < gc.threshold;
  return rep;
}

} // namespace derivnet

#endif
