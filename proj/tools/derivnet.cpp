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

// derivnet command-line tool.
//
// Exit codes: 0 ok, 1 verification failure, 2 usage, 3 numeric failure,
// 4 partial sweep failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "derivnet/derivnet.hpp"

namespace fs = std::filesystem;
using namespace derivnet;

namespace {

enum Exit { kOk = 0, kVerifyFail = 1, kUsage = 2, kNumeric = 3, kPartial = 4 };

std::vector<int> parse_layers(const std::string &s) {
  std::vector<int> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size())
        throw std::invalid_argument(tok);
    } catch (const std::exception &) {
      throw usage_error("bad --layers value '" + s + "' (expected e.g. 2,64,64,1)");
    }
  }
  return out;
}

/// DERIVNET_SEED, when set, replaces the configured master seed.
void apply_env_seed(std::uint64_t &seed) {
  if (const char *env = std::getenv("DERIVNET_SEED")) {
    try {
      std::size_t used = 0;
      const std::string s(env);
      const auto v = std::stoull(s, &used);
      if (used != s.size())
        throw std::invalid_argument(s);
      seed = v;
    } catch (const std::exception &) {
      throw usage_error(std::string("DERIVNET_SEED is not an unsigned integer: '") + env + "'");
    }
  }
}

template <class T> void override_with(const std::optional<T> &flag, T &target) {
  if (flag)
    target = *flag;
}

std::ofstream open_out(const fs::path &p) {
  std::ofstream os(p, std::ios::binary);
  if (!os)
    throw usage_error("cannot write " + p.string());
  return os;
}

// --- gradcheck

struct GradcheckFlags {
  std::string config;
  std::optional<std::string> task, layers;
  std::optional<int> order, params, patterns;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  bool corrupt = false;
};

int cmd_gradcheck(const GradcheckFlags &f) {
  GradcheckConfig g = f.config.empty() ? GradcheckConfig{} : gradcheck_config_from_json(load_json(f.config));
  if (f.task) {
    g.task = parse_task(*f.task);
    if (!f.layers && f.config.empty())
      g.layers.front() = make_task(g.task).dim();
  }
  if (f.layers)
    g.layers = parse_layers(*f.layers);
  override_with(f.order, g.order);
  override_with(f.params, g.params);
  override_with(f.patterns, g.patterns);
  apply_env_seed(g.seed);
  override_with(f.seed, g.seed);
  override_with(f.threshold, g.threshold);
  if (f.corrupt)
    g.corrupt = true;
  const GradcheckReport r = gradcheck(g);
  std::cout << "# " << header_line(to_json(g)) << '\n'
            << "checked " << r.params_checked << " parameters, max relative error " << r.max_rel_err << '\n';
  if (r.passed) {
    std::cout << "PASS\n";
    return kOk;
  }
  std::cout << "FAIL worst parameter " << r.worst_param << ": analytic " << r.analytic << " vs finite difference "
            << r.numeric << '\n';
  return kVerifyFail;
}

// --- train

struct TrainFlags {
  std::string config, out = "run";
  std::optional<std::string> task, layers, precision;
  std::optional<int> order, epochs, window;
  std::optional<double> lambda, tau, test_lambda, threshold;
  std::optional<std::uint64_t> seed;
  bool timing = false;
};

int cmd_train(const TrainFlags &f) {
  TrainSettings t = f.config.empty() ? TrainSettings{} : train_settings_from_json(load_json(f.config));
  RunConfig &r = t.run;
  if (f.task) {
    r.task = parse_task(*f.task);
    r.net.layers.front() = make_task(r.task).dim();
  }
  if (f.layers)
    r.net.layers = parse_layers(*f.layers);
  if (f.precision)
    r.net.precision = detail::parse_precision(*f.precision);
  override_with(f.order, r.order);
  override_with(f.lambda, r.grid.lambda);
  override_with(f.tau, r.grid.tau);
  override_with(f.test_lambda, t.test_lambda);
  if (f.epochs) {
    r.stop.max_epochs = *f.epochs;
    r.stop.window = std::min(r.stop.window, *f.epochs);
  }
  override_with(f.window, r.stop.window);
  override_with(f.threshold, r.stop.threshold);
  apply_env_seed(r.seed);
  override_with(f.seed, r.seed);
  if (f.timing)
    t.timing = true;
  if (t.test_lambda <= 0)
    t.test_lambda = default_test_lambda(r.task);
  r.validate();

  const json cfg = to_json(t);
  const std::string header = header_line(cfg);
  const Grid grid = run_grid(r);
  const auto pats = run_patterns(r, grid);
  std::cerr << "training " << name(r.task) << " net " << r.net.id() << " s=" << r.order << " on " << pats.size()
            << " points\n";
  const RunResult res = train_on(r, pats, [](int e, double rms) {
    if (e > 0 && e % 1000 == 0)
      std::cerr << "  epoch " << e << " rms " << rms << '\n';
  });

  fs::create_directories(f.out);
  json summary;
  summary["config"] = cfg;
  summary["status"] = res.ok ? "ok" : "failed";
  if (!res.ok)
    summary["message"] = res.message;
  summary["points"] = res.points;
  summary["N"] = res.equivalent;
  summary["epochs"] = res.epochs;
  summary["best_epoch"] = res.best_epoch;
  summary["delta_median"] = delta_median(res);
  summary["change_probability"] = res.change_probability;
  summary["wall_seconds"] = t.timing ? res.wall_seconds : 0.0;
  if (res.ok) {
    const TestSet test = make_test_set(r.task, GridSpec{t.test_lambda, 0.0, seed_hash({r.seed, 0x7e57ULL})});
    const Metrics m = evaluate(res.best, pats, test);
    summary["train_rms_e0"] = m.train_rms;
    summary["test_rms_e0"] = m.test_rms;
    summary["log10_ratio"] = m.log10_ratio;
    summary["test_points"] = test.points.size();
    if (make_task(r.task).is_poisson())
      summary["max_dev"] = m.max_dev;
  }
  {
    auto os = open_out(fs::path(f.out) / "summary.json");
    os << summary.dump(2) << '\n';
  }
  {
    auto os = open_out(fs::path(f.out) / "weights.dnwt");
    if (r.net.precision == Precision::single)
      save_params(os, res.best.cast<float>());
    else
      save_params(os, res.best);
  }
  {
    auto os = open_out(fs::path(f.out) / "trace.csv");
    os << "# " << header << "\nepoch,train_rms_e0,nonzero_steps\n";
    const std::size_t nparams = res.best.size();
    for (std::size_t e = 0; e < res.trace.size(); ++e)
      os << e << ',' << detail::num(res.trace[e]) << ',' << (e == 0 ? nparams : res.deltas[e - 1]) << '\n';
  }
  std::cout << summary.dump(2) << '\n';
  if (!res.ok) {
    std::cerr << "error: " << res.message << '\n';
    return kNumeric;
  }
  return kOk;
}

// --- experiment

struct ExperimentFlags {
  std::string config, out = "results";
  std::optional<std::string> experiment, precision;
  bool full = false, timing = false;
  std::optional<int> repeats, stride, jobs, epochs;
  std::optional<std::uint64_t> seed;
  std::optional<double> test_lambda;
};

int cmd_experiment(const ExperimentFlags &f) {
  ExperimentSettings e = f.config.empty() ? ExperimentSettings{} : experiment_settings_from_json(load_json(f.config));
  override_with(f.experiment, e.experiment);
  if (f.full)
    e.full = true;
  if (f.precision)
    e.precision = detail::parse_precision(*f.precision);
  override_with(f.repeats, e.repeats);
  override_with(f.stride, e.stride);
  override_with(f.jobs, e.jobs);
  if (f.epochs) {
    e.stop.max_epochs = *f.epochs;
    e.stop.window = std::min(e.stop.window, *f.epochs);
  }
  apply_env_seed(e.seed);
  override_with(f.seed, e.seed);
  override_with(f.test_lambda, e.test_lambda);
  if (f.timing)
    e.timing = true;
  const ExperimentPlan plan = e.plan();
  const std::string header = header_line(to_json(e));
  const auto rows = run_experiment(plan, [](const ExperimentRow &r, std::size_t done, std::size_t total) {
    std::cerr << '[' << done << '/' << total << "] " << r.mode << " s=" << r.s << " net=" << r.net
              << " lambda=" << r.lambda << " M=" << r.M << " repeat=" << r.repeat << " log10_ratio=" << r.log10_ratio
              << ' ' << r.status << '\n';
  });
  const std::size_t failed = write_experiment_outputs(f.out, plan.name, rows, plan.seed, header);
  std::cout << "wrote " << rows.size() << " runs to " << f.out << '\n';
  if (failed > 0) {
    std::cerr << failed << " run(s) failed\n";
    return kPartial;
  }
  return kOk;
}

// --- gen-grid

struct GridFlags {
  std::string config, out = "-";
  std::optional<std::string> domain;
  std::optional<double> lambda, tau;
  std::optional<std::uint64_t> seed;
};

int cmd_gen_grid(const GridFlags &f) {
  GridSettings g = f.config.empty() ? GridSettings{} : grid_settings_from_json(load_json(f.config));
  if (f.domain)
    g.domain = parse_domain(*f.domain);
  override_with(f.lambda, g.spec.lambda);
  override_with(f.tau, g.spec.tau);
  apply_env_seed(g.spec.seed);
  override_with(f.seed, g.spec.seed);
  const Grid grid = generate_grid(Domain{g.domain}, g.spec);
  std::ostringstream os;
  os << "# " << header_line(to_json(g)) << '\n';
  write_grid(os, grid);
  if (f.out == "-") {
    std::cout << os.str();
  } else {
    auto file = open_out(f.out);
    file << os.str();
  }
  std::cerr << grid.size() << " points (" << grid.interior.size() << " interior, " << grid.surface.size()
            << " surface)\n";
  return kOk;
}

// --- report

struct ReportFlags {
  std::string in, out;
};

int cmd_report(const ReportFlags &f) {
  std::ifstream is(f.in);
  if (!is)
    throw usage_error("cannot read " + f.in);
  std::string header;
  for (std::string line; std::getline(is, line) && !line.empty() && line[0] == '#';)
    header += line.substr(std::min<std::size_t>(2, line.size())) + '\n';
  is.clear();
  is.seekg(0);
  const auto rows = read_results_csv(is);
  std::uint64_t seed = 0;
  const auto pos = header.find("\"seed\":");
  if (pos != std::string::npos)
    seed = std::stoull(header.substr(pos + 7));
  const fs::path out = f.out.empty() ? fs::path(f.in).parent_path() : fs::path(f.out);
  const std::size_t failed = write_experiment_outputs(out.empty() ? fs::path(".") : out, experiment_of(rows), rows,
                                                      seed, header.empty() ? "report" : header);
  std::cout << "aggregated " << rows.size() << " runs into " << group_cells(rows).size() << " cells\n";
  return failed > 0 ? kPartial : kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"derivnet: derivative-augmented training of multilayer perceptrons"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "derivnet 0.1.0");

  GradcheckFlags gf;
  auto *gc = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  gc->add_option("--config", gf.config, "JSON config file");
  gc->add_option("--task", gf.task, "approx2d, approx5d or poisson2d");
  gc->add_option("--layers", gf.layers, "Layer sizes, e.g. 2,8,8,1");
  gc->add_option("--order", gf.order, "Cost order s (0..4)");
  gc->add_option("--params", gf.params, "Parameters to check");
  gc->add_option("--patterns", gf.patterns, "Random patterns in the batch");
  gc->add_option("--seed", gf.seed, "Seed");
  gc->add_option("--threshold", gf.threshold, "Pass threshold on relative error");
  gc->add_flag("--corrupt", gf.corrupt, "Perturb the reverse sweep (negative control)");

  TrainFlags tf;
  auto *tr = app.add_subcommand("train", "Train one network and write summary, weights and trace");
  tr->add_option("--config", tf.config, "JSON config file");
  tr->add_option("--out", tf.out, "Output directory")->capture_default_str();
  tr->add_option("--task", tf.task, "approx2d, approx5d or poisson2d");
  tr->add_option("--layers", tf.layers, "Layer sizes, e.g. 2,64,64,1");
  tr->add_option("--precision", tf.precision, "single or double");
  tr->add_option("--order", tf.order, "Cost order s (0..4)");
  tr->add_option("--lambda", tf.lambda, "Training grid spacing");
  tr->add_option("--tau", tf.tau, "Surface spacing (0: domain default)");
  tr->add_option("--test-lambda", tf.test_lambda, "Test grid spacing");
  tr->add_option("--epochs", tf.epochs, "Epoch cap");
  tr->add_option("--window", tf.window, "Stopping window in epochs");
  tr->add_option("--threshold", tf.threshold, "Required relative improvement per window");
  tr->add_option("--seed", tf.seed, "Run seed");
  tr->add_flag("--timing", tf.timing, "Record wall time");

  ExperimentFlags ef;
  auto *ex = app.add_subcommand("experiment", "Run a sweep and write result tables and plot data");
  ex->add_option("experiment", ef.experiment, "approx2d, approx5d, poisson2d or var-order");
  ex->add_option("--config", ef.config, "JSON config file");
  ex->add_option("--out", ef.out, "Output directory")->capture_default_str();
  ex->add_flag("--full", ef.full, "Include the two large networks");
  ex->add_option("--precision", ef.precision, "single or double");
  ex->add_option("--repeats", ef.repeats, "Repeats per cell");
  ex->add_option("--stride", ef.stride, "Use every n-th grid of the series");
  ex->add_option("--jobs", ef.jobs, "Runs in parallel");
  ex->add_option("--epochs", ef.epochs, "Epoch cap");
  ex->add_option("--seed", ef.seed, "Master seed");
  ex->add_option("--test-lambda", ef.test_lambda, "Test grid spacing");
  ex->add_flag("--timing", ef.timing, "Record wall times");

  GridFlags gg;
  auto *gen = app.add_subcommand("gen-grid", "Write a training grid");
  gen->add_option("--config", gg.config, "JSON config file");
  gen->add_option("--domain", gg.domain, "box2d, disk2d or ball5d");
  gen->add_option("--lambda", gg.lambda, "Lattice spacing");
  gen->add_option("--tau", gg.tau, "Surface spacing (0: domain default)");
  gen->add_option("--seed", gg.seed, "Seed");
  gen->add_option("--out", gg.out, "Output file, - for stdout")->capture_default_str();

  ReportFlags rf;
  auto *rep = app.add_subcommand("report", "Rebuild aggregates and plot data from a results table");
  rep->add_option("--in", rf.in, "results.csv")->required();
  rep->add_option("--out", rf.out, "Output directory (default: next to the input)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gc)
      return cmd_gradcheck(gf);
    if (*tr)
      return cmd_train(tf);
    if (*ex)
      return cmd_experiment(ef);
    if (*gen)
      return cmd_gen_grid(gg);
    if (*rep)
      return cmd_report(rf);
  } catch (const usage_error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const numeric_error &e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}
