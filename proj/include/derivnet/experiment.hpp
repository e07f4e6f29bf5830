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

/// @file experiment.hpp
/// Sweeps over grid spacing x network x training mode with repeats, and the
/// result tables and plot-data files they produce.

#ifndef DERIVNET_EXPERIMENT_HPP
#define DERIVNET_EXPERIMENT_HPP

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "derivnet/errors.hpp"
#include "derivnet/geometry.hpp"
#include "derivnet/harness.hpp"
#include "derivnet/targets.hpp"

namespace derivnet {

/// One training mode of a sweep: cost order and the spacing range it runs on.
struct SweepMode {
  std::string label;
  int order = 0;
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
};

struct ExperimentPlan {
  std::string name; ///< approx2d, approx5d, poisson2d or var-order
  TaskId task = TaskId::approx2d;
  std::vector<NetworkConfig> nets;
  std::vector<SweepMode> modes;
  double series_start = 0.0;
  double series_end = 0.0;
  double test_lambda = 0.0;
  int repeats = 5;
  int stride = 1; ///< keep every stride-th grid of the series
  std::uint64_t seed = 1;
  StopRule stop;
  RpropConfig rprop;
  int jobs = 1;
  bool timing = false; ///< record wall time (makes output non-reproducible)

  void validate() const {
    detail::require(!nets.empty() && !modes.empty(), "experiment: need at least one network and one mode");
    detail::require(repeats >= 1 && stride >= 1 && jobs >= 1, "experiment: repeats, stride and jobs must be >= 1");
    detail::require(series_start > 0.0 && series_end >= series_start, "experiment: bad grid series");
    detail::require(test_lambda > 0.0, "experiment: test lambda must be positive");
    const TaskDef t = make_task(task);
    for (const NetworkConfig &n : nets) {
      n.validate();
      detail::require(n.input_dim() == t.dim(), "experiment: network input size does not match the task");
    }
    for (const SweepMode &m : modes)
      t.cost_spec(m.order);
    stop.validate();
    rprop.validate();
  }
};

inline std::vector<int> hidden_net(int inputs, int width) { return {inputs, width, width, width, width, width, width, 1}; }

/// Sweep layout for one figure family; `full` adds the two large networks.
inline ExperimentPlan make_plan(const std::string &name, bool full, Precision precision = Precision::single) {
  ExperimentPlan p;
  p.name = name;
  std::vector<int> widths{64};
  if (full)
    widths = {64, 512, 1024};
  int inputs = 2;
  if (name == "approx2d") {
    p.task = TaskId::approx2d;
    p.series_start = 0.073;
    p.series_end = 1.45;
    p.test_lambda = 0.035;
    p.modes = {{"extended", 4, 0.24, 1.45}, {"classical", 0, 0.073, 0.37}};
  } else if (name == "approx5d" || name == "var-order") {
    p.task = TaskId::approx5d;
    inputs = 5;
    p.series_start = 0.336;
    p.series_end = 1.1;
    p.test_lambda = 0.22;
    if (name == "approx5d") {
      p.modes = {{"extended", 4, 0.55, 1.1}, {"classical", 0, 0.336, 0.62}};
    } else {
      // Each order covers the spacings whose equivalent count N lies in
      // the window shared by the extended and classical 5D sweeps.
      const TaskDef t = make_task(p.task);
      const auto series = grid_series(t.domain, p.series_start, p.series_end);
      for (int s = 0; s <= kMaxCostOrder; ++s) {
        double lo = 0.0, hi = 0.0;
        for (double lam : series) {
          std::mt19937_64 rng(seed_hash({0x5eedULL, static_cast<std::uint64_t>(lam * 1e9)}));
          const std::size_t m = interior_points(t.domain, lam, rng).size() +
                                surface_count(t.domain, t.domain.default_tau_factor() * lam);
          const double n = static_cast<double>(m * t.multiplier(s));
          if (n >= 99.0 && n <= 1500.0) {
            lo = lo == 0.0 ? lam : std::min(lo, lam);
            hi = std::max(hi, lam);
          }
        }
        p.modes.push_back({"order-" + std::to_string(s), s, lo, hi});
      }
    }
  } else if (name == "poisson2d") {
    p.task = TaskId::poisson2d;
    p.series_start = 0.07;
    p.series_end = 1.62;
    p.test_lambda = 0.033;
    p.modes = {{"extended", 4, 0.16, 1.62}, {"classical", 0, 0.07, 0.6}};
  } else {
    throw usage_error("unknown experiment '" + name + "' (expected approx2d, approx5d, poisson2d or var-order)");
  }
  for (int w : widths)
    p.nets.push_back(NetworkConfig{hidden_net(inputs, w), precision});
  return p;
}

struct ExperimentRow {
  std::string task, mode;
  int s = 0;
  std::string net;
  double lambda = 0.0;
  double M = 0.0, N = 0.0;
  int repeat = 0;
  double epochs = 0.0, best_epoch = 0.0;
  double train_rms = 0.0, test_rms = 0.0, log10_ratio = 0.0, max_dev = 0.0;
  double delta_median = 0.0, wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::string status;
};

/// One cell-repeat of a sweep, ready to run.
struct PlannedRun {
  RunConfig cfg;
  std::string mode;
  int repeat = 0;
};

inline std::vector<PlannedRun> expand(const ExperimentPlan &plan) {
  plan.validate();
  const TaskDef task = make_task(plan.task);
  const auto series = grid_series(task.domain, plan.series_start, plan.series_end);
  // Window ends are quoted to two digits; take the nearest series members.
  const double slack = std::sqrt(std::pow(1.0 / 0.9, 1.0 / task.dim()));
  std::vector<PlannedRun> runs;
  for (const SweepMode &m : plan.modes)
    for (const NetworkConfig &net : plan.nets)
      for (std::size_t gi = 0; gi < series.size(); gi += static_cast<std::size_t>(plan.stride)) {
        const double lam = series[gi];
        if (lam < m.lambda_lo / slack || lam > m.lambda_hi * slack)
          continue;
        for (int r = 0; r < plan.repeats; ++r) {
          RunConfig c;
          c.task = plan.task;
          c.net = net;
          c.order = m.order;
          c.grid = GridSpec{lam, 0.0, 0};
          c.stop = plan.stop;
          c.rprop = plan.rprop;
          c.seed = repeat_seed(plan.seed, gi, net, m.order, r);
          runs.push_back({c, m.label, r});
        }
      }
  return runs;
}

inline TestSet plan_test_set(const ExperimentPlan &plan) {
  return make_test_set(plan.task, GridSpec{plan.test_lambda, 0.0, seed_hash({plan.seed, 0x7e57ULL})});
}

/// Trains and evaluates one planned run. Numeric failures become a row
/// with status "failed" and NaN metrics.
inline ExperimentRow execute(const PlannedRun &run, const TestSet &test, bool timing) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const RunConfig &c = run.cfg;
  ExperimentRow row{name(c.task), run.mode, c.order, c.net.id(), c.grid.lambda, 0, 0, run.repeat,
                    0, 0, nan, nan, nan, nan, 0, 0, c.seed, "ok"};
  const Grid g = run_grid(c);
  const auto pats = run_patterns(c, g);
  const RunResult r = train_on(c, pats);
  row.M = static_cast<double>(r.points);
  row.N = static_cast<double>(r.equivalent);
  row.epochs = r.epochs;
  row.best_epoch = r.best_epoch;
  row.delta_median = delta_median(r);
  row.wall_seconds = timing ? r.wall_seconds : 0.0;
  if (!r.ok) {
    row.status = "failed";
    return row;
  }
  try {
    const Metrics m = evaluate(r.best, pats, test);
    row.train_rms = m.train_rms;
    row.test_rms = m.test_rms;
    row.log10_ratio = m.log10_ratio;
    row.max_dev = m.max_dev;
  } catch (const numeric_error &) {
    row.status = "failed";
  }
  return row;
}

/// Runs every planned run, `jobs` at a time; rows come back in plan order.
inline std::vector<ExperimentRow>
run_experiment(const ExperimentPlan &plan,
               const std::function<void(const ExperimentRow &, std::size_t, std::size_t)> &on_row = {}) {
  const auto runs = expand(plan);
  const TestSet test = plan_test_set(plan);
  std::vector<ExperimentRow> rows(runs.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mu;
  const auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      ExperimentRow row = execute(runs[i], test, plan.timing);
      std::lock_guard<std::mutex> lock(mu);
      rows[i] = std::move(row);
      ++done;
      if (on_row)
        on_row(rows[i], done, runs.size());
    }
  };
  const int n = std::min<int>(plan.jobs, static_cast<int>(std::max<std::size_t>(1, runs.size())));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t)
      pool.emplace_back(worker);
    for (auto &t : pool)
      t.join();
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Tables

inline const char *kResultColumns =
    "task,mode,s,net,lambda,M,N,repeat,epochs,best_epoch,train_rms_e0,test_rms_e0,log10_ratio,max_dev,"
    "delta_median,wall_seconds,seed,status";

namespace detail {

inline std::string num(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  // Shortest text that reads back to the same double.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_num(const std::string &s) {
  if (s == "nan")
    return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size())
      return v;
  } catch (const std::exception &) {
  }
  if (s == "inf")
    return std::numeric_limits<double>::infinity();
  if (s == "-inf")
    return -std::numeric_limits<double>::infinity();
  throw usage_error("csv: not a number: '" + s + "'");
}

inline std::string quoted(const std::string &s) {
  return s.find(',') == std::string::npos ? s : "\"" + s + "\"";
}

inline std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> out(1);
  bool quote = false;
  for (char c : line) {
    if (c == '"')
      quote = !quote;
    else if (c == ',' && !quote)
      out.emplace_back();
    else if (c != '\r')
      out.back() += c;
  }
  require(!quote, "csv: unbalanced quote");
  return out;
}

inline void write_header(std::ostream &os, const std::string &header) {
  std::istringstream in(header);
  for (std::string line; std::getline(in, line);)
    os << "# " << line << '\n';
}

} // namespace detail

inline void write_row(std::ostream &os, const ExperimentRow &r, const std::string &stat = {}) {
  using detail::num;
  os << r.task << ',' << r.mode << ',' << r.s << ',' << detail::quoted(r.net) << ',' << num(r.lambda) << ','
     << num(r.M) << ',' << num(r.N) << ',' << r.repeat << ',' << num(r.epochs) << ',' << num(r.best_epoch) << ','
     << num(r.train_rms) << ',' << num(r.test_rms) << ',' << num(r.log10_ratio) << ',' << num(r.max_dev) << ','
     << num(r.delta_median) << ',' << num(r.wall_seconds) << ',' << r.seed << ',' << r.status;
  if (!stat.empty())
    os << ',' << stat;
  os << '\n';
}

/// `header` lines are echoed as '#' comments above the column names.
inline void write_results_csv(std::ostream &os, const std::vector<ExperimentRow> &rows, const std::string &header) {
  detail::write_header(os, header);
  os << kResultColumns << '\n';
  for (const auto &r : rows)
    write_row(os, r);
}

inline std::vector<ExperimentRow> read_results_csv(std::istream &is) {
  std::vector<ExperimentRow> rows;
  bool seen_columns = false;
  for (std::string line; std::getline(is, line);) {
    if (line.empty() || line[0] == '#')
      continue;
    if (!seen_columns) {
      detail::require(line.rfind(kResultColumns, 0) == 0, "csv: unexpected column header");
      seen_columns = true;
      continue;
    }
    const auto f = detail::split_csv(line);
    detail::require(f.size() == 18, "csv: expected 18 fields per row");
    ExperimentRow r;
    r.task = f[0];
    r.mode = f[1];
    r.s = static_cast<int>(detail::parse_num(f[2]));
    r.net = f[3];
    r.lambda = detail::parse_num(f[4]);
    r.M = detail::parse_num(f[5]);
    r.N = detail::parse_num(f[6]);
    r.repeat = static_cast<int>(detail::parse_num(f[7]));
    r.epochs = detail::parse_num(f[8]);
    r.best_epoch = detail::parse_num(f[9]);
    r.train_rms = detail::parse_num(f[10]);
    r.test_rms = detail::parse_num(f[11]);
    r.log10_ratio = detail::parse_num(f[12]);
    r.max_dev = detail::parse_num(f[13]);
    r.delta_median = detail::parse_num(f[14]);
    r.wall_seconds = detail::parse_num(f[15]);
    r.seed = std::stoull(f[16]);
    r.status = f[17];
    rows.push_back(std::move(r));
  }
  detail::require(seen_columns, "csv: no column header");
  return rows;
}

struct Cell {
  std::vector<ExperimentRow> rows; ///< all repeats, in order
};

/// Repeats grouped by (task, mode, s, net, lambda), in first-seen order.
inline std::vector<Cell> group_cells(const std::vector<ExperimentRow> &rows) {
  std::vector<Cell> cells;
  std::map<std::string, std::size_t> index;
  for (const auto &r : rows) {
    const std::string key = r.task + '|' + r.mode + '|' + std::to_string(r.s) + '|' + r.net + '|' + detail::num(r.lambda);
    const auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, cells.size());
      cells.push_back({{r}});
    } else {
      cells[it->second].rows.push_back(r);
    }
  }
  return cells;
}

/// mean, min, max and lower 3-quantile of each numeric column over the
/// successful repeats of every cell.
inline std::vector<std::pair<ExperimentRow, std::string>> aggregate(const std::vector<ExperimentRow> &rows,
                                                                   std::uint64_t master_seed) {
  std::vector<std::pair<ExperimentRow, std::string>> out;
  for (const Cell &cell : group_cells(rows)) {
    std::vector<const ExperimentRow *> ok;
    for (const auto &r : cell.rows)
      if (r.status == "ok")
        ok.push_back(&r);
    const ExperimentRow &first = cell.rows.front();
    const std::string status =
        ok.size() == cell.rows.size() ? "ok" : (ok.empty() ? "failed" : "partial");
    double ExperimentRow::*cols[] = {&ExperimentRow::M,           &ExperimentRow::N,
                                     &ExperimentRow::epochs,      &ExperimentRow::best_epoch,
                                     &ExperimentRow::train_rms,   &ExperimentRow::test_rms,
                                     &ExperimentRow::log10_ratio, &ExperimentRow::max_dev,
                                     &ExperimentRow::delta_median, &ExperimentRow::wall_seconds};
    for (const char *stat : {"mean", "min", "max", "q3low"}) {
      ExperimentRow a = first;
      a.repeat = static_cast<int>(ok.size());
      a.seed = master_seed;
      a.status = status;
      for (auto col : cols) {
        std::vector<double> v;
        for (const auto *r : ok)
          if (!std::isnan(r->*col))
            v.push_back(r->*col);
        double x = std::numeric_limits<double>::quiet_NaN();
        if (!v.empty()) {
          const std::string s = stat;
          if (s == "mean") {
            double sum = 0.0;
            for (double d : v)
              sum += d;
            x = sum / static_cast<double>(v.size());
          } else if (s == "min") {
            x = *std::min_element(v.begin(), v.end());
          } else if (s == "max") {
            x = *std::max_element(v.begin(), v.end());
          } else {
            x = quantile(v, 1.0 / 3.0);
          }
        }
        a.*col = x;
      }
      out.emplace_back(a, stat);
    }
  }
  return out;
}

inline void write_aggregate_csv(std::ostream &os, const std::vector<ExperimentRow> &rows, std::uint64_t master_seed,
                                const std::string &header) {
  detail::write_header(os, header);
  os << kResultColumns << ",stat\n";
  for (const auto &[row, stat] : aggregate(rows, master_seed))
    write_row(os, row, stat);
}

// ---------------------------------------------------------------------------
// Plot data

enum class PlotMetric { log10_ratio, log10_test_rms, log10_max_dev };

struct FigureSpec {
  std::string name;
  PlotMetric metric;
  bool extended_only = false;
};

inline std::vector<FigureSpec> figures_for(const std::string &experiment) {
  if (experiment == "approx2d")
    return {{"2d1", PlotMetric::log10_ratio}, {"2d2", PlotMetric::log10_ratio, true}, {"2d3", PlotMetric::log10_test_rms}};
  if (experiment == "approx5d")
    return {{"5d1", PlotMetric::log10_ratio}, {"5d2", PlotMetric::log10_ratio, true}, {"5d3", PlotMetric::log10_test_rms}};
  if (experiment == "poisson2d")
    return {{"deq1", PlotMetric::log10_ratio}, {"deq2", PlotMetric::log10_test_rms}, {"deq4", PlotMetric::log10_max_dev}};
  if (experiment == "var-order")
    return {{"varORD", PlotMetric::log10_ratio}};
  throw usage_error("unknown experiment '" + experiment + "'");
}

/// Experiment family of a results table: its task, or var-order when the
/// modes are per-order labels.
inline std::string experiment_of(const std::vector<ExperimentRow> &rows) {
  detail::require(!rows.empty(), "report: no rows");
  for (const auto &r : rows)
    if (r.mode.rfind("order-", 0) == 0)
      return "var-order";
  return rows.front().task;
}

struct CurvePoint {
  double log10_n = 0.0, mean = 0.0, min = 0.0, max = 0.0;
};

/// Curves keyed by "mode net", each sorted by log10 N. Per-repeat values
/// are reduced in log space, except the maximum deviation, which is
/// averaged first and then taken to log10.
inline std::map<std::string, std::vector<CurvePoint>> curves(const std::vector<ExperimentRow> &rows,
                                                             const FigureSpec &fig) {
  std::map<std::string, std::vector<CurvePoint>> out;
  for (const Cell &cell : group_cells(rows)) {
    const ExperimentRow &first = cell.rows.front();
    if (fig.extended_only && first.mode != "extended")
      continue;
    std::vector<double> v, n;
    for (const auto &r : cell.rows) {
      if (r.status != "ok")
        continue;
      double y = r.log10_ratio;
      if (fig.metric == PlotMetric::log10_test_rms)
        y = std::log10(r.test_rms);
      else if (fig.metric == PlotMetric::log10_max_dev)
        y = r.max_dev;
      if (std::isnan(y))
        continue;
      v.push_back(y);
      n.push_back(r.N);
    }
    if (v.empty())
      continue;
    double sum = 0.0, nsum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      sum += v[i];
      nsum += n[i];
    }
    CurvePoint p{std::log10(nsum / static_cast<double>(n.size())), sum / static_cast<double>(v.size()),
                 *std::min_element(v.begin(), v.end()), *std::max_element(v.begin(), v.end())};
    if (fig.metric == PlotMetric::log10_max_dev) {
      p.mean = std::log10(p.mean);
      p.min = std::log10(p.min);
      p.max = std::log10(p.max);
    }
    out[first.mode + " s=" + std::to_string(first.s) + " net=" + first.net].push_back(p);
  }
  for (auto &[key, pts] : out)
    std::sort(pts.begin(), pts.end(), [](const CurvePoint &a, const CurvePoint &b) { return a.log10_n < b.log10_n; });
  return out;
}

/// Two-column blocks (log10 N, metric), one per curve and statistic,
/// separated by blank lines.
inline void write_plot_data(std::ostream &os, const std::vector<ExperimentRow> &rows, const FigureSpec &fig,
                            const std::string &header) {
  detail::write_header(os, header);
  os << "# figure " << fig.name << '\n';
  bool first_block = true;
  for (const auto &[key, pts] : curves(rows, fig)) {
    for (const char *stat : {"mean", "min", "max"}) {
      if (!first_block)
        os << '\n';
      first_block = false;
      os << "# curve " << key << " stat=" << stat << '\n';
      for (const CurvePoint &p : pts) {
        const double y = std::string(stat) == "mean" ? p.mean : (std::string(stat) == "min" ? p.min : p.max);
        os << detail::num(p.log10_n) << ' ' << detail::num(y) << '\n';
      }
    }
  }
}

/// results.csv, aggregate.csv and one .dat per figure under `dir`.
/// Returns the number of failed runs.
inline std::size_t write_experiment_outputs(const std::filesystem::path &dir, const std::string &experiment,
                                            const std::vector<ExperimentRow> &rows, std::uint64_t master_seed,
                                            const std::string &header) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const std::string &file) {
    std::ofstream os(dir / file, std::ios::binary);
    detail::require(static_cast<bool>(os), "cannot write " + (dir / file).string());
    return os;
  };
  {
    auto os = open("results.csv");
    write_results_csv(os, rows, header);
  }
  {
    auto os = open("aggregate.csv");
    write_aggregate_csv(os, rows, master_seed, header);
  }
  for (const FigureSpec &fig : figures_for(experiment)) {
    auto os = open(fig.name + ".dat");
    write_plot_data(os, rows, fig, header);
  }
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const ExperimentRow &r) { return r.status != "ok"; }));
}

} // namespace derivnet

#endif
