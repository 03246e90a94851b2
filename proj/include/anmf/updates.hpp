#pragma once

// Inner update rules for the W factor: the floored multiplicative update,
// the HALS column sweep, and one projected-gradient step with backtracking.
// All three consume precomputed A = M H^T and B = H H^T and never read M,
// so repeating them while H is fixed costs no further M work. The H factor
// is updated by running the same rules on the transposed problem.

#include <cmath>
#include <vector>

#include "kernels.hpp"
#include "matrix.hpp"

namespace anmf {

enum class Algo { MU, HALS, PG };

inline const char* algo_name(Algo a) {
  switch (a) {
    case Algo::MU: return "mu";
    case Algo::HALS: return "hals";
    case Algo::PG: return "pg";
  }
  return "?";
}

struct Safeguards {
  double delta = 1e-16;         // floor on MU iterates, keeps entries off exact zero
  double reinit_value = 1e-16;  // reseed for HALS columns that collapse to zero
  double denom_floor = 1e-16;   // division guard
};

struct PgParams {
  double sigma = 0.01;       // sufficient-decrease constant
  double beta = 0.1;         // step shrink factor
  double initial_step = 1.0; // warm-started across inner iterations
  int max_backtracks = 20;
};

namespace detail {
inline void check_update_shapes(const DenseMatrix& w, const DenseMatrix& a,
                                const DenseMatrix& b, const char* who) {
  require(w.same_shape(a), std::string(who) + ": W and A shapes differ");
  require(b.rows == b.cols && b.rows == w.cols, std::string(who) + ": B must be r x r");
}
}  // namespace detail

// W' = max(delta, W o A / max(WB, denom_floor)). The factor floor alone does
// not rule out a vanishing denominator when B has a zero diagonal, hence the
// explicit guard on WB.
inline DenseMatrix mu_update(const DenseMatrix& w, const DenseMatrix& a,
                             const DenseMatrix& b, const Safeguards& sg = {}) {
  detail::check_update_shapes(w, a, b, "mu_update");
  require(w.min_entry() >= 0.0, "mu_update: W has a negative entry");
  DenseMatrix c = matmul(w, b);
  DenseMatrix out(w.rows, w.cols);
  for (index_t i = 0; i < w.values.size(); ++i) {
    const double denom = std::max(c.values[i], sg.denom_floor);
    out.values[i] = std::max(sg.delta, w.values[i] * (a.values[i] / denom));
  }
  return out;
}

// Exact minimizer over column p with the other columns held fixed:
//   W_:p = max(0, (A_:p - sum_{l != p} W_:l B_lp) / B_pp),
// evaluated in place so columns l < p are already at their new values.
// A column that lands at all-zero is reseeded to a small positive constant;
// a column with B_pp at or below the floor is left untouched.
inline void hals_update_column(DenseMatrix& w, const DenseMatrix& a, const DenseMatrix& b,
                               index_t p, const Safeguards& sg = {}) {
  detail::check_update_shapes(w, a, b, "hals_update_column");
  require(p < w.cols, "hals_update_column: column index out of range");
  const index_t r = w.cols;
  const double bpp = b(p, p);
  if (bpp <= sg.denom_floor) return;
  std::vector<double> bcol(r);
  for (index_t l = 0; l < r; ++l) bcol[l] = b(l, p);
  bool all_zero = true;
  for (index_t i = 0; i < w.rows; ++i) {
    auto wi = w.row(i);
    double s = a(i, p);
    for (index_t l = 0; l < p; ++l) s -= wi[l] * bcol[l];
    for (index_t l = p + 1; l < r; ++l) s -= wi[l] * bcol[l];
    const double v = std::max(0.0, s / bpp);
    wi[p] = v;
    if (v != 0.0) all_zero = false;
  }
  if (all_zero) {
    for (index_t i = 0; i < w.rows; ++i) w(i, p) = sg.reinit_value;
  }
}

inline DenseMatrix hals_update(const DenseMatrix& w, const DenseMatrix& a,
                               const DenseMatrix& b, const Safeguards& sg = {}) {
  detail::check_update_shapes(w, a, b, "hals_update");
  double scale = 0.0;
  for (double v : b.values) scale = std::max(scale, std::abs(v));
  const double sym_tol = 1e-12 * std::max(1.0, scale);
  for (index_t p = 0; p < b.rows; ++p)
    for (index_t q = p + 1; q < b.cols; ++q)
      require(std::abs(b(p, q) - b(q, p)) <= sym_tol, "hals_update: B is not symmetric");
  DenseMatrix out = w;
  for (index_t p = 0; p < w.cols; ++p) hals_update_column(out, a, b, p, sg);
  return out;
}

struct PgStep {
  DenseMatrix w;
  double step = 0.0;
  bool stalled = false;
};

// One projected-gradient step W' = max(0, W - s G) with G = 2WB - 2A. The
// step is backtracked from the warm start until the Armijo test on the exact
// quadratic model holds:
//   (1 - sigma) <G, D> + <D, DB> <= 0,  D = W' - W,
// which equals f(W') - f(W) <= sigma <G, D> without ever touching M. If every
// candidate fails, W is returned unchanged with the fully shrunk step and the
// stalled flag set.
inline PgStep pg_update(const DenseMatrix& w, const DenseMatrix& a, const DenseMatrix& b,
                        const PgParams& pp = {}) {
  detail::check_update_shapes(w, a, b, "pg_update");
  DenseMatrix g = matmul(w, b);
  for (index_t i = 0; i < g.values.size(); ++i)
    g.values[i] = 2.0 * g.values[i] - 2.0 * a.values[i];
  double s = pp.initial_step;
  for (int t = 0; t < pp.max_backtracks; ++t) {
    DenseMatrix cand(w.rows, w.cols);
    for (index_t i = 0; i < w.values.size(); ++i)
      cand.values[i] = std::max(0.0, w.values[i] - s * g.values[i]);
    DenseMatrix d(w.rows, w.cols);
    for (index_t i = 0; i < w.values.size(); ++i)
      d.values[i] = cand.values[i] - w.values[i];
    const double gd = dot(g, d);
    const double dbd = dot(d, matmul(d, b));
    if ((1.0 - pp.sigma) * gd + dbd <= 0.0) return {std::move(cand), s, false};
    s *= pp.beta;
  }
  return {w, s, true};
}

// Dispatch used by the outer loop and the oracle module. The pg_step slot
// carries the warm-started step size between calls.
inline DenseMatrix apply_update(Algo algo, const DenseMatrix& w, const DenseMatrix& a,
                                const DenseMatrix& b, const Safeguards& sg, const PgParams& pp,
                                double& pg_step) {
  switch (algo) {
    case Algo::MU: return mu_update(w, a, b, sg);
    case Algo::HALS: return hals_update(w, a, b, sg);
    case Algo::PG: {
      PgParams local = pp;
      local.initial_step = pg_step;
      PgStep st = pg_update(w, a, b, local);
      pg_step = st.step;
      return std::move(st.w);
    }
  }
  throw std::invalid_argument("apply_update: unknown algorithm");
}

}  // namespace anmf
