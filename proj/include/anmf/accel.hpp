#pragma once

// The accelerated outer loop: each outer iteration pays for A = M H^T and
// B = H H^T once, then repeats the cheap inner update up to floor(1+alpha*rho)
// times, breaking early when the latest displacement falls under epsilon times
// the first one. The H phase runs the same machinery on the transposed
// problem. Error evaluation happens off the clock and reuses the cached
// products, so a run performs exactly two M-sized products per outer
// iteration no matter how many inner updates it makes.

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "cost_model.hpp"
#include "kernels.hpp"
#include "matrix.hpp"
#include "updates.hpp"

namespace anmf {

struct AccelConfig {
  Algo algo = Algo::MU;
  double alpha = 0.0;
  double epsilon = 0.0;
  Safeguards safeguards{};
  PgParams pg{};
  long long max_outer = -1;   // < 0 means unbounded
  double time_budget = -1.0;  // seconds; < 0 means unbounded
  std::uint64_t seed = 0;     // echoed into traces and output files
  double rho_w_override = 0.0;  // > 0 substitutes a measured rho for the flop model
  double rho_h_override = 0.0;
  bool use_measured_rho = false;  // ask the harness to calibrate the overrides
  std::string label;
};

namespace presets {
inline AccelConfig make(Algo a, double alpha, double eps, std::string label) {
  AccelConfig c;
  c.algo = a;
  c.alpha = alpha;
  c.epsilon = eps;
  c.label = std::move(label);
  return c;
}
inline AccelConfig mu() { return make(Algo::MU, 0.0, 0.0, "mu"); }
inline AccelConfig a_mu() { return make(Algo::MU, 2.0, 0.1, "a-mu"); }
inline AccelConfig hals() { return make(Algo::HALS, 0.0, 0.0, "hals"); }
inline AccelConfig a_hals() { return make(Algo::HALS, 0.5, 0.1, "a-hals"); }
inline AccelConfig pg() { return make(Algo::PG, 0.0, 0.0, "pg"); }
inline AccelConfig a_pg() { return make(Algo::PG, 0.5, 0.0, "a-pg"); }
}  // namespace presets

struct TraceSample {
  double elapsed = 0.0;  // seconds, error-evaluation time excluded
  double error = 0.0;    // ||M - WH||_F
};

struct InnerCounts {
  int w = 0;
  int h = 0;
};

struct RunTrace {
  std::vector<TraceSample> samples;       // samples[0] is the initial iterate
  std::vector<InnerCounts> inner_counts;  // one entry per outer iteration
  AccelConfig config;
  CostModel cost;
  double rho_w_used = 0.0, rho_h_used = 0.0;
  bool rho_measured = false;
  int budget_w = 1, budget_h = 1;
  FactorPair factors;  // final iterate
};

// Monotonic timer with pause/resume so measurement work stays off the clock.
class Stopwatch {
 public:
  void start() {
    start_ = clock::now();
    running_ = true;
  }
  void pause() {
    if (running_) {
      accum_ += std::chrono::duration<double>(clock::now() - start_).count();
      running_ = false;
    }
  }
  void resume() {
    if (!running_) {
      start_ = clock::now();
      running_ = true;
    }
  }
  double elapsed() const {
    double t = accum_;
    if (running_) t += std::chrono::duration<double>(clock::now() - start_).count();
    return t;
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_{};
  double accum_ = 0.0;
  bool running_ = false;
};

// Applies `step` up to `budget` times, stopping once the displacement of the
// latest update is at most epsilon times the displacement of the first one.
template <typename Step>
std::pair<DenseMatrix, int> inner_loop(DenseMatrix w, Step&& step, int budget, double epsilon) {
  require(budget >= 1, "inner_loop: budget must be >= 1");
  require(epsilon >= 0.0, "inner_loop: epsilon must be >= 0");
  double first_disp = 0.0;
  int used = 0;
  for (int l = 1; l <= budget; ++l) {
    DenseMatrix next = step(static_cast<const DenseMatrix&>(w));
    const double disp = frob_diff(next, w);
    w = std::move(next);
    used = l;
    if (l == 1) first_disp = disp;
    if (disp <= epsilon * first_disp) break;
  }
  return {std::move(w), used};
}

inline RunTrace run_nmf(const Matrix& m, const FactorPair& init, const AccelConfig& cfg) {
  const index_t mm = rows(m), nn = cols(m);
  require(init.W.rows == mm && init.H.cols == nn && init.W.cols == init.H.rows,
          "run_nmf: factor shapes not conformal with M");
  require(init.W.cols >= 1, "run_nmf: rank must be >= 1");
  require(init.W.min_entry() >= 0.0 && init.H.min_entry() >= 0.0,
          "run_nmf: initial factors must be nonnegative");
  require(cfg.alpha >= 0.0 && cfg.epsilon >= 0.0, "run_nmf: alpha and epsilon must be >= 0");
  require(cfg.max_outer >= 0 || cfg.time_budget >= 0.0,
          "run_nmf: at most one of max_outer/time_budget may be unbounded");

  const index_t r = init.W.cols;
  RunTrace trace;
  trace.config = cfg;
  trace.cost = cost_model(mm, nn, r, nnz_count(m));
  trace.rho_w_used = cfg.rho_w_override > 0.0 ? cfg.rho_w_override : trace.cost.rho_w;
  trace.rho_h_used = cfg.rho_h_override > 0.0 ? cfg.rho_h_override : trace.cost.rho_h;
  trace.rho_measured = cfg.rho_w_override > 0.0 || cfg.rho_h_override > 0.0;
  trace.budget_w = inner_budget(cfg.alpha, trace.rho_w_used);
  trace.budget_h = inner_budget(cfg.alpha, trace.rho_h_used);

  DenseMatrix W = init.W;
  DenseMatrix H = init.H;
  if (cfg.algo == Algo::MU && cfg.safeguards.delta > 0.0) {
    // the floored update assumes iterates start at or above delta
    for (double& v : W.values) v = std::max(v, cfg.safeguards.delta);
    for (double& v : H.values) v = std::max(v, cfg.safeguards.delta);
  }
  const double msq = frob_sq(m);

  auto record = [&trace](double t, double err) {
    if (!trace.samples.empty() && t <= trace.samples.back().elapsed)
      t = trace.samples.back().elapsed + 1e-9;  // clock ticks can be coarser than tiny iterations
    trace.samples.push_back({t, err});
  };

  Stopwatch watch;
  watch.start();
  for (long long k = 0;; ++k) {
    if (cfg.max_outer >= 0 && k >= cfg.max_outer) break;
    if (cfg.time_budget >= 0.0 && k > 0 && watch.elapsed() >= cfg.time_budget) break;

    // W phase
    DenseMatrix A = right_product(m, H);
    DenseMatrix B = gram(H);
    if (k == 0) {
      watch.pause();
      record(0.0, frob_error_from(msq, A, B, W));
      watch.resume();
    }
    double pg_step_w = cfg.pg.initial_step;
    auto step_w = [&](const DenseMatrix& x) {
      return apply_update(cfg.algo, x, A, B, cfg.safeguards, cfg.pg, pg_step_w);
    };
    auto [w_next, used_w] = inner_loop(std::move(W), step_w, trace.budget_w, cfg.epsilon);
    W = std::move(w_next);

    // H phase: same update on the transposed problem
    DenseMatrix At = transpose(left_product(W, m));  // n x r = M^T W
    DenseMatrix Bh = gram_cols(W);                   // r x r = W^T W
    DenseMatrix Ht = transpose(H);
    double pg_step_h = cfg.pg.initial_step;
    auto step_h = [&](const DenseMatrix& x) {
      return apply_update(cfg.algo, x, At, Bh, cfg.safeguards, cfg.pg, pg_step_h);
    };
    auto [h_next, used_h] = inner_loop(std::move(Ht), step_h, trace.budget_h, cfg.epsilon);

    watch.pause();
    record(watch.elapsed(), frob_error_from(msq, At, Bh, h_next));
    trace.inner_counts.push_back({used_w, used_h});
    H = transpose(h_next);
    watch.resume();
  }

  if (trace.samples.empty()) {
    // no outer iteration ran; evaluate the starting error directly
    trace.samples.push_back({0.0, frob_error(m, W, H, nullptr, nullptr, &msq)});
  }
  trace.factors = {std::move(W), std::move(H)};
  return trace;
}

struct RhoEstimate {
  double rho_w = 0.0, rho_h = 0.0;
  double t_first_w = 0.0, t_next_w = 0.0;
  double t_first_h = 0.0, t_next_h = 0.0;
  int batch_w = 1, batch_h = 1;
};

namespace detail {
inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace detail

// Measures how expensive the first inner update (products included) is
// relative to the following ones, per factor side. The wall-clock ratio is
// the drop-in substitute for the flop-model rho when per-update constants
// differ from the model, which is the case for HALS's column loop. If a
// single update is too fast for the clock, updates are batched and the
// measured span divided.
// clock_granularity is the smallest span the clock measures reliably; spans
// under 10x that get batched. The default is deliberately coarse: one-shot
// sub-millisecond readings wobble by 2-3x from cache transients and
// scheduler noise even when the clock itself ticks in nanoseconds.
template <typename ClockFn>
RhoEstimate calibrate_rho(const Matrix& m, const DenseMatrix& w, const DenseMatrix& h,
                          Algo algo, int repetitions, ClockFn&& now,
                          double clock_granularity = 1e-4) {
  require(repetitions >= 3, "calibrate_rho: need at least 3 repetitions");
  require(w.rows == rows(m) && h.cols == cols(m) && w.cols == h.rows,
          "calibrate_rho: factor shapes not conformal with M");
  const Safeguards sg;
  const PgParams pp;

  auto side = [&](auto products, const DenseMatrix& x0, double* t_first, double* t_next,
                  int* batch_out) {
    std::vector<double> firsts, nexts;
    int batch = 1;
    for (;;) {
      firsts.clear();
      nexts.clear();
      for (int rep = 0; rep < repetitions; ++rep) {
        double pg_step = pp.initial_step;
        const double t0 = now();
        auto [a, b] = products();
        DenseMatrix x = apply_update(algo, x0, a, b, sg, pp, pg_step);
        const double t1 = now();
        firsts.push_back(t1 - t0);
        const double t2 = now();
        for (int i = 0; i < batch; ++i) x = apply_update(algo, x, a, b, sg, pp, pg_step);
        const double t3 = now();
        nexts.push_back((t3 - t2) / batch);
      }
      if (detail::median_of(nexts) * batch >= 10.0 * clock_granularity || batch >= 4096) break;
      batch *= 2;
    }
    *t_first = detail::median_of(firsts);
    *t_next = std::max(detail::median_of(nexts), 1e-300);
    *batch_out = batch;
    return *t_first / *t_next;
  };

  RhoEstimate est;
  est.rho_w = side([&] { return std::pair{right_product(m, h), gram(h)}; }, w, &est.t_first_w,
                   &est.t_next_w, &est.batch_w);
  const DenseMatrix ht = transpose(h);
  est.rho_h = side([&] { return std::pair{transpose(left_product(w, m)), gram_cols(w)}; }, ht,
                   &est.t_first_h, &est.t_next_h, &est.batch_h);
  return est;
}

inline RhoEstimate calibrate_rho(const Matrix& m, const DenseMatrix& w, const DenseMatrix& h,
                                 Algo algo, int repetitions = 5) {
  return calibrate_rho(m, w, h, algo, repetitions, [] {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  });
}

}  // namespace anmf
