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

/// @file config.hpp
/// JSON configuration files. Every document carries "schema_version": 1;
/// unknown keys are rejected and absent keys keep their defaults.

#ifndef DERIVNET_CONFIG_HPP
#define DERIVNET_CONFIG_HPP

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "derivnet/errors.hpp"
#include "derivnet/experiment.hpp"
#include "derivnet/geometry.hpp"
#include "derivnet/harness.hpp"

namespace derivnet {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline void check_keys(const json &j, std::initializer_list<const char *> allowed, const std::string &where) {
  require(j.is_object(), where + ": expected a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto &[k, v] : j.items())
    require(ok.count(k) > 0, where + ": unknown key '" + k + "'");
}

template <class T> void read_opt(const json &j, const char *key, T &out, const std::string &where) {
  if (!j.contains(key))
    return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception &) {
    throw usage_error(where + ": wrong type for '" + key + "'");
  }
}

inline void check_schema(const json &j, const std::string &where) {
  require(j.is_object(), where + ": expected a JSON object");
  require(j.contains("schema_version"), where + ": missing schema_version");
  int v = 0;
  read_opt(j, "schema_version", v, where);
  require(v == kSchemaVersion, where + ": unsupported schema_version " + std::to_string(v));
}

inline Precision parse_precision(const std::string &s) {
  if (s == "single")
    return Precision::single;
  if (s == "double")
    return Precision::double_;
  throw usage_error("unknown precision '" + s + "' (expected single or double)");
}

} // namespace detail

inline json load_json(const std::string &path) {
  std::ifstream is(path);
  detail::require(static_cast<bool>(is), "cannot read config " + path);
  try {
    return json::parse(is);
  } catch (const nlohmann::json::exception &e) {
    throw usage_error("config " + path + ": " + e.what());
  }
}

// --- pieces

inline json to_json(const StopRule &s) {
  return {{"max_epochs", s.max_epochs}, {"window", s.window}, {"threshold", s.threshold}};
}

inline void from_json_into(const json &j, StopRule &s) {
  detail::check_keys(j, {"max_epochs", "window", "threshold"}, "stop");
  detail::read_opt(j, "max_epochs", s.max_epochs, "stop");
  detail::read_opt(j, "window", s.window, "stop");
  detail::read_opt(j, "threshold", s.threshold, "stop");
}

inline json to_json(const RpropConfig &r) {
  return {{"eta_plus", r.eta_plus},
          {"eta_minus", r.eta_minus},
          {"delta0", r.delta0},
          {"clamp", r.clamp},
          {"resurrect_value", r.resurrect_value},
          {"resurrect_period", r.resurrect_period},
          {"backtracking", r.backtracking}};
}

inline void from_json_into(const json &j, RpropConfig &r) {
  detail::check_keys(j, {"eta_plus", "eta_minus", "delta0", "clamp", "resurrect_value", "resurrect_period", "backtracking"},
                     "rprop");
  detail::read_opt(j, "eta_plus", r.eta_plus, "rprop");
  detail::read_opt(j, "eta_minus", r.eta_minus, "rprop");
  detail::read_opt(j, "delta0", r.delta0, "rprop");
  detail::read_opt(j, "clamp", r.clamp, "rprop");
  detail::read_opt(j, "resurrect_value", r.resurrect_value, "rprop");
  detail::read_opt(j, "resurrect_period", r.resurrect_period, "rprop");
  detail::read_opt(j, "backtracking", r.backtracking, "rprop");
}

inline json to_json(const NetworkConfig &n) { return {{"layers", n.layers}, {"precision", name(n.precision)}}; }

inline void from_json_into(const json &j, NetworkConfig &n) {
  detail::check_keys(j, {"layers", "precision"}, "network");
  detail::read_opt(j, "layers", n.layers, "network");
  std::string p = name(n.precision);
  detail::read_opt(j, "precision", p, "network");
  n.precision = detail::parse_precision(p);
}

// --- train

struct TrainSettings {
  RunConfig run;
  double test_lambda = 0.0; ///< 0 selects the task default
  bool timing = false;
};

inline double default_test_lambda(TaskId t) {
  switch (t) {
  case TaskId::approx2d:
    return 0.035;
  case TaskId::approx5d:
    return 0.22;
  case TaskId::poisson2d:
    return 0.033;
  }
  return 0.035;
}

inline json to_json(const TrainSettings &t) {
  const RunConfig &r = t.run;
  return {{"schema_version", kSchemaVersion},
          {"task", name(r.task)},
          {"network", to_json(r.net)},
          {"order", r.order},
          {"grid", {{"lambda", r.grid.lambda}, {"tau", r.grid.tau}}},
          {"test_lambda", t.test_lambda > 0 ? t.test_lambda : default_test_lambda(r.task)},
          {"stop", to_json(r.stop)},
          {"rprop", to_json(r.rprop)},
          {"seed", r.seed},
          {"timing", t.timing}};
}

inline TrainSettings train_settings_from_json(const json &j) {
  const std::string w = "train config";
  detail::check_schema(j, w);
  detail::check_keys(j, {"schema_version", "task", "network", "order", "grid", "test_lambda", "stop", "rprop", "seed", "timing"},
                     w);
  TrainSettings t;
  std::string task = name(t.run.task);
  detail::read_opt(j, "task", task, w);
  t.run.task = parse_task(task);
  if (t.run.task == TaskId::approx5d)
    t.run.net.layers = hidden_net(5, 64);
  if (j.contains("network"))
    from_json_into(j.at("network"), t.run.net);
  detail::read_opt(j, "order", t.run.order, w);
  if (j.contains("grid")) {
    detail::check_keys(j.at("grid"), {"lambda", "tau"}, "grid");
    detail::read_opt(j.at("grid"), "lambda", t.run.grid.lambda, "grid");
    detail::read_opt(j.at("grid"), "tau", t.run.grid.tau, "grid");
  }
  detail::read_opt(j, "test_lambda", t.test_lambda, w);
  if (j.contains("stop"))
    from_json_into(j.at("stop"), t.run.stop);
  if (j.contains("rprop"))
    from_json_into(j.at("rprop"), t.run.rprop);
  detail::read_opt(j, "seed", t.run.seed, w);
  detail::read_opt(j, "timing", t.timing, w);
  return t;
}

// --- experiment

struct ExperimentSettings {
  std::string experiment = "approx2d";
  bool full = false;
  Precision precision = Precision::single;
  int repeats = 5;
  int stride = 1;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool timing = false;
  StopRule stop;
  RpropConfig rprop;
  double test_lambda = 0.0; ///< 0 keeps the experiment default

  ExperimentPlan plan() const {
    ExperimentPlan p = make_plan(experiment, full, precision);
    p.repeats = repeats;
    p.stride = stride;
    p.seed = seed;
    p.jobs = jobs;
    p.timing = timing;
    p.stop = stop;
    p.rprop = rprop;
    if (test_lambda > 0)
      p.test_lambda = test_lambda;
    p.validate();
    return p;
  }
};

inline json to_json(const ExperimentSettings &e) {
  return {{"schema_version", kSchemaVersion},
          {"experiment", e.experiment},
          {"full", e.full},
          {"precision", name(e.precision)},
          {"repeats", e.repeats},
          {"stride", e.stride},
          {"seed", e.seed},
          {"jobs", e.jobs},
          {"timing", e.timing},
          {"stop", to_json(e.stop)},
          {"rprop", to_json(e.rprop)},
          {"test_lambda", e.test_lambda}};
}

inline ExperimentSettings experiment_settings_from_json(const json &j) {
  const std::string w = "experiment config";
  detail::check_schema(j, w);
  detail::check_keys(j, {"schema_version", "experiment", "full", "precision", "repeats", "stride", "seed", "jobs", "timing",
                         "stop", "rprop", "test_lambda"},
                     w);
  ExperimentSettings e;
  detail::read_opt(j, "experiment", e.experiment, w);
  detail::read_opt(j, "full", e.full, w);
  std::string p = name(e.precision);
  detail::read_opt(j, "precision", p, w);
  e.precision = detail::parse_precision(p);
  detail::read_opt(j, "repeats", e.repeats, w);
  detail::read_opt(j, "stride", e.stride, w);
  detail::read_opt(j, "seed", e.seed, w);
  detail::read_opt(j, "jobs", e.jobs, w);
  detail::read_opt(j, "timing", e.timing, w);
  if (j.contains("stop"))
    from_json_into(j.at("stop"), e.stop);
  if (j.contains("rprop"))
    from_json_into(j.at("rprop"), e.rprop);
  detail::read_opt(j, "test_lambda", e.test_lambda, w);
  return e;
}

// --- gradcheck

inline json to_json(const GradcheckConfig &g) {
  return {{"schema_version", kSchemaVersion}, {"task", name(g.task)}, {"layers", g.layers},
          {"order", g.order},                 {"params", g.params},     {"patterns", g.patterns},
          {"seed", g.seed},                   {"threshold", g.threshold}, {"corrupt", g.corrupt}};
}

inline GradcheckConfig gradcheck_config_from_json(const json &j) {
  const std::string w = "gradcheck config";
  detail::check_schema(j, w);
  detail::check_keys(j, {"schema_version", "task", "layers", "order", "params", "patterns", "seed", "threshold", "corrupt"}, w);
  GradcheckConfig g;
  std::string task = name(g.task);
  detail::read_opt(j, "task", task, w);
  g.task = parse_task(task);
  detail::read_opt(j, "layers", g.layers, w);
  detail::read_opt(j, "order", g.order, w);
  detail::read_opt(j, "params", g.params, w);
  detail::read_opt(j, "patterns", g.patterns, w);
  detail::read_opt(j, "seed", g.seed, w);
  detail::read_opt(j, "threshold", g.threshold, w);
  detail::read_opt(j, "corrupt", g.corrupt, w);
  return g;
}

// --- gen-grid

struct GridSettings {
  DomainKind domain = DomainKind::box2d;
  GridSpec spec{0.1, 0.0, 1};
};

inline json to_json(const GridSettings &g) {
  return {{"schema_version", kSchemaVersion},
          {"domain", name(g.domain)},
          {"lambda", g.spec.lambda},
          {"tau", g.spec.tau},
          {"seed", g.spec.seed}};
}

inline GridSettings grid_settings_from_json(const json &j) {
  const std::string w = "grid config";
  detail::check_schema(j, w);
  detail::check_keys(j, {"schema_version", "domain", "lambda", "tau", "seed"}, w);
  GridSettings g;
  std::string d = name(g.domain);
  detail::read_opt(j, "domain", d, w);
  g.domain = parse_domain(d);
  detail::read_opt(j, "lambda", g.spec.lambda, w);
  detail::read_opt(j, "tau", g.spec.tau, w);
  detail::read_opt(j, "seed", g.spec.seed, w);
  return g;
}

/// Compact one-line echo for '#' headers.
inline std::string header_line(const json &j) { return "config: " + j.dump(); }

} // namespace derivnet

#endif
