#pragma once

// Multi-seed experiment orchestration: run every (config, seed) pair on one
// dataset from a shared initialization protocol, normalize the error traces
// against the best error any run achieved, average per config over seeds, and
// emit plot-ready CSV plus a flat key=value summary.

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "accel.hpp"
#include "init.hpp"
#include "io.hpp"
#include "nnls.hpp"
#include "synth.hpp"

namespace anmf {

struct DatasetSpec {
  bool is_file = false;
  std::string path;
  MatrixFormat format = MatrixFormat::MatrixMarket;
  SynthKind kind = SynthKind::UniformDense;
  index_t m = 0, n = 0, r_true = 1;
  double density = 1.0, noise = 0.0;
  std::uint64_t seed = 1234;

  Matrix materialize() const {
    if (is_file) return load_matrix(path, format);
    return synth_matrix(kind, m, n, r_true, density, noise, seed);
  }

  std::string describe() const {
    if (is_file) return "file:" + path;
    return std::string("synth:") + synth_kind_name(kind) + "," + std::to_string(m) + "," +
           std::to_string(n) + "," + std::to_string(r_true) + "," + detail::g17(density) + "," +
           detail::g17(noise);
  }
};

struct ExperimentSpec {
  DatasetSpec dataset;
  index_t rank = 0;
  std::vector<AccelConfig> configs;
  std::vector<std::uint64_t> seeds;
  long long max_outer = -1;    // applied uniformly to every config
  double time_budget = -1.0;
  int grid_points = 200;
  std::string out_dir;
};

struct CurvePoint {
  double t = 0.0;
  double e = 0.0;  // normalized error, in [0,1] for monotone algorithms
};

struct ConfigCurve {
  std::string label;
  std::vector<double> t, mean_e, lo_e, hi_e;
  bool degenerate = false;  // some trace started at the reference minimum
};

struct NormalizedCurves {
  double e_min = 0.0;
  std::vector<ConfigCurve> curves;
};

// e(t) as a step function: the error of the last sample at or before t.
inline double step_interp(const std::vector<TraceSample>& samples, double t) {
  double e = samples.front().error;
  for (const auto& s : samples) {
    if (s.elapsed > t) break;
    e = s.error;
  }
  return e;
}

// First recorded time at which the trace's normalized error reaches thr;
// +inf when it never does.
inline double time_to_threshold(const std::vector<TraceSample>& samples, double e_min,
                                double thr) {
  const double e0 = samples.front().error;
  const double gap = e0 - e_min;
  if (gap <= 0.0) return 0.0;
  for (const auto& s : samples)
    if ((s.error - e_min) / gap <= thr) return s.elapsed;
  return std::numeric_limits<double>::infinity();
}

inline std::vector<double> uniform_grid(const std::vector<RunTrace>& traces, int points) {
  require(points >= 2, "uniform_grid: need at least 2 points");
  double tmax = 0.0;
  for (const auto& tr : traces) tmax = std::max(tmax, tr.samples.back().elapsed);
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    grid[static_cast<std::size_t>(i)] = tmax * static_cast<double>(i) / (points - 1);
  return grid;
}

namespace detail {
inline std::string curve_key(const AccelConfig& c) {
  if (!c.label.empty()) return c.label;
  return std::string(algo_name(c.algo)) + "_a" + g17(c.alpha) + "_e" + g17(c.epsilon);
}
}  // namespace detail

// E(t) = (e(t) - e_min) / (e(0) - e_min) per trace, with e_min the smallest
// error observed across all supplied traces, then averaged per config label.
inline NormalizedCurves normalized_curve(const std::vector<RunTrace>& traces,
                                         const std::vector<double>& grid) {
  require(!traces.empty(), "normalized_curve: need at least one trace");
  NormalizedCurves out;
  out.e_min = std::numeric_limits<double>::infinity();
  for (const auto& tr : traces)
    for (const auto& s : tr.samples) out.e_min = std::min(out.e_min, s.error);

  std::map<std::string, std::vector<std::size_t>> groups;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const std::string key = detail::curve_key(traces[i].config);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(i);
  }

  for (const auto& key : order) {
    ConfigCurve cc;
    cc.label = key;
    cc.t = grid;
    cc.mean_e.resize(grid.size());
    cc.lo_e.resize(grid.size());
    cc.hi_e.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (std::size_t i : groups[key]) {
        const auto& tr = traces[i];
        const double e0 = tr.samples.front().error;
        const double gap = e0 - out.e_min;
        double e = 0.0;
        if (gap <= 0.0) {
          cc.degenerate = true;  // started at the reference minimum
        } else {
          e = (step_interp(tr.samples, grid[g]) - out.e_min) / gap;
        }
        sum += e;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
      }
      const double count = static_cast<double>(groups[key].size());
      cc.mean_e[g] = sum / count;
      cc.lo_e[g] = lo;
      cc.hi_e[g] = hi;
    }
    out.curves.push_back(std::move(cc));
  }
  return out;
}

inline void write_curve_csv(const std::string& path, const ConfigCurve& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,mean_E,min_E,max_E\n";
  for (std::size_t i = 0; i < c.t.size(); ++i)
    out << detail::g17(c.t[i]) << "," << detail::g17(c.mean_e[i]) << ","
        << detail::g17(c.lo_e[i]) << "," << detail::g17(c.hi_e[i]) << "\n";
}

// First grid time where the config's mean normalized error reaches thr.
inline double curve_time_to(const ConfigCurve& c, double thr) {
  for (std::size_t i = 0; i < c.t.size(); ++i)
    if (c.mean_e[i] <= thr) return c.t[i];
  return std::numeric_limits<double>::infinity();
}

// Substitutes measured update-cost ratios for the flop model in a config.
inline void apply_measured_rho(AccelConfig& cfg, const Matrix& data, index_t rank,
                               std::uint64_t seed) {
  FactorPair wh = init_factors(rows(data), cols(data), rank, seed, data);
  const RhoEstimate est = calibrate_rho(data, wh.W, wh.H, cfg.algo, 5);
  cfg.rho_w_override = std::max(est.rho_w, 1.0);
  cfg.rho_h_override = std::max(est.rho_h, 1.0);
}

struct RunRecord {
  std::string label;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string message;
  std::string trace_path;
};

struct ExperimentResult {
  std::vector<RunTrace> traces;  // successful runs only
  std::vector<RunRecord> records;
  NormalizedCurves curves;
  std::vector<std::pair<std::string, std::string>> summary;
};

namespace detail {
inline std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '-');
  return out;
}
inline double median_dbl(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.empty() ? 0.0 : (v.size() % 2 ? v[v.size() / 2]
                                         : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]));
}
}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  require(!spec.seeds.empty(), "run_experiment: seed list is empty");
  require(!spec.configs.empty(), "run_experiment: config list is empty");
  require(spec.rank >= 1, "run_experiment: rank must be >= 1");
  require(spec.max_outer >= 0 || spec.time_budget >= 0.0,
          "run_experiment: set max_outer or time_budget");

  const Matrix data = spec.dataset.materialize();
  const bool writing = !spec.out_dir.empty();
  if (writing) std::filesystem::create_directories(spec.out_dir);

  ExperimentResult result;
  std::vector<AccelConfig> configs = spec.configs;
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    AccelConfig& cfg = configs[ci];
    if (cfg.label.empty()) cfg.label = detail::curve_key(cfg);
    cfg.max_outer = spec.max_outer;
    cfg.time_budget = spec.time_budget;
    if (cfg.use_measured_rho) apply_measured_rho(cfg, data, spec.rank, spec.seeds.front());
    for (std::uint64_t seed : spec.seeds) {
      AccelConfig run_cfg = cfg;
      run_cfg.seed = seed;
      RunRecord rec;
      rec.label = cfg.label;
      rec.seed = seed;
      try {
        const FactorPair start = init_factors(rows(data), cols(data), spec.rank, seed, data);
        RunTrace trace = run_nmf(data, start, run_cfg);
        if (writing) {
          rec.trace_path = spec.out_dir + "/trace_" + detail::sanitize(cfg.label) + "_seed" +
                           std::to_string(seed) + ".csv";
          write_trace_csv(rec.trace_path, trace);
        }
        result.traces.push_back(std::move(trace));
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.message = e.what();
      }
      result.records.push_back(std::move(rec));
    }
  }

  result.summary.emplace_back("dataset", spec.dataset.describe());
  result.summary.emplace_back("rank", std::to_string(spec.rank));
  result.summary.emplace_back("seeds", std::to_string(spec.seeds.size()));
  std::size_t failed = 0;
  for (const auto& r : result.records) failed += r.failed ? 1 : 0;
  result.summary.emplace_back("runs_failed", std::to_string(failed));
  for (const auto& r : result.records)
    if (r.failed)
      result.summary.emplace_back("failure." + detail::sanitize(r.label) + ".seed" +
                                      std::to_string(r.seed),
                                  r.message);

  if (!result.traces.empty()) {
    const std::vector<double> grid = uniform_grid(result.traces, spec.grid_points);
    result.curves = normalized_curve(result.traces, grid);
    result.summary.emplace_back("e_min", detail::g17(result.curves.e_min));
    for (const auto& curve : result.curves.curves) {
      const std::string base = "config." + detail::sanitize(curve.label);
      if (writing)
        write_curve_csv(spec.out_dir + "/curve_" + detail::sanitize(curve.label) + ".csv", curve);
      result.summary.emplace_back(base + ".t_to_E0.1", detail::g17(curve_time_to(curve, 0.1)));
      result.summary.emplace_back(base + ".t_to_E0.01", detail::g17(curve_time_to(curve, 0.01)));
      // per-seed crossing times, median over seeds
      for (double thr : {0.1, 0.01}) {
        std::vector<double> times;
        for (const auto& tr : result.traces)
          if (detail::curve_key(tr.config) == curve.label)
            times.push_back(time_to_threshold(tr.samples, result.curves.e_min, thr));
        result.summary.emplace_back(base + ".median_seed_t_to_E" + detail::g17(thr),
                                    detail::g17(detail::median_dbl(times)));
      }
    }
  }
  if (writing) write_summary(spec.out_dir + "/summary.txt", result.summary);
  return result;
}

}  // namespace anmf
