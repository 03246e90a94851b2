#pragma once

// Exact nonnegative least squares by the Lawson-Hanson active-set method,
// with Cholesky solves on the passive set. Used as a correctness oracle for
// the inner update rules and to reference inner iterates against the true
// subproblem optimum. Never part of the benchmark clock.

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "kernels.hpp"
#include "matrix.hpp"
#include "updates.hpp"

namespace anmf {

struct NnlsProblem {
  DenseMatrix G;          // observations x variables
  std::vector<double> c;  // observations
};

struct NnlsSolution {
  std::vector<double> x;
  bool cycled = false;  // swap cap hit; x is the best feasible iterate seen
  int swaps = 0;
};

namespace detail {

// In-place LL^T factorization and solve; false on a nonpositive pivot.
inline bool cholesky_solve(std::vector<double>& a, std::vector<double>& rhs, index_t p) {
  for (index_t k = 0; k < p; ++k) {
    double d = a[k * p + k];
    for (index_t j = 0; j < k; ++j) d -= a[k * p + j] * a[k * p + j];
    if (d <= 0.0) return false;
    const double l = std::sqrt(d);
    a[k * p + k] = l;
    for (index_t i = k + 1; i < p; ++i) {
      double s = a[i * p + k];
      for (index_t j = 0; j < k; ++j) s -= a[i * p + j] * a[k * p + j];
      a[i * p + k] = s / l;
    }
  }
  for (index_t i = 0; i < p; ++i) {
    double s = rhs[i];
    for (index_t j = 0; j < i; ++j) s -= a[i * p + j] * rhs[j];
    rhs[i] = s / a[i * p + i];
  }
  for (index_t i = p; i-- > 0;) {
    double s = rhs[i];
    for (index_t j = i + 1; j < p; ++j) s -= a[j * p + i] * rhs[j];
    rhs[i] = s / a[i * p + i];
  }
  return true;
}

// Least squares on the passive subset of the normal equations. A collapsed
// pivot (rank-deficient subset) gets one retry with a small diagonal ridge.
inline bool solve_passive(const DenseMatrix& gtg, const std::vector<double>& gtc,
                          const std::vector<index_t>& idx, std::vector<double>* z) {
  const index_t p = idx.size();
  std::vector<double> sub(p * p);
  double max_diag = 0.0;
  for (index_t i = 0; i < p; ++i) {
    for (index_t j = 0; j < p; ++j) sub[i * p + j] = gtg(idx[i], idx[j]);
    max_diag = std::max(max_diag, gtg(idx[i], idx[i]));
  }
  std::vector<double> rhs(p);
  for (index_t i = 0; i < p; ++i) rhs[i] = gtc[idx[i]];
  std::vector<double> work = sub;
  std::vector<double> sol = rhs;
  if (!cholesky_solve(work, sol, p)) {
    const double ridge = 1e-12 * std::max(max_diag, 1.0);
    work = sub;
    for (index_t i = 0; i < p; ++i) work[i * p + i] += ridge;
    sol = rhs;
    if (!cholesky_solve(work, sol, p)) return false;
  }
  *z = std::move(sol);
  return true;
}

}  // namespace detail

// Lawson-Hanson on the normal equations G^T G x = G^T c. Entering variable is
// the most negative gradient component, lowest index on exact ties; after the
// first repeated passive set the rule drops to Bland's lowest-index choice.
// A cap of 3 * variables set changes bounds degenerate cycling.
inline NnlsSolution nnls_normal(const DenseMatrix& gtg, const std::vector<double>& gtc,
                                double tol = 1e-10) {
  const index_t n = gtc.size();
  require(gtg.rows == n && gtg.cols == n, "nnls: G^T G must be square and match c");
  require(tol > 0.0, "nnls: tol must be > 0");

  double scale = 0.0;
  for (double v : gtc) scale += v * v;
  scale = std::sqrt(scale);
  const double threshold = tol * scale;

  std::vector<double> x(n, 0.0);
  std::vector<bool> passive(n, false);
  const int cap = 3 * static_cast<int>(n);
  int swaps = 0;
  bool bland = false;
  bool cycled = false;
  std::set<std::vector<bool>> seen;

  auto objective = [&](const std::vector<double>& xx) {
    double q = 0.0;
    for (index_t i = 0; i < n; ++i) {
      if (xx[i] == 0.0) continue;
      double row = 0.0;
      for (index_t j = 0; j < n; ++j) row += gtg(i, j) * xx[j];
      q += xx[i] * (row - 2.0 * gtc[i]);
    }
    return q;
  };
  std::vector<double> best_x = x;
  double best_q = 0.0;  // objective at x = 0, up to the ||c||^2 constant

  for (;;) {
    std::vector<double> w(n);
    for (index_t i = 0; i < n; ++i) {
      double s = gtc[i];
      for (index_t j = 0; j < n; ++j) s -= gtg(i, j) * x[j];
      w[i] = s;
    }
    int enter = -1;
    if (!bland) {
      double best_w = threshold;
      for (index_t j = 0; j < n; ++j)
        if (!passive[j] && w[j] > best_w) {
          best_w = w[j];
          enter = static_cast<int>(j);
        }
    } else {
      for (index_t j = 0; j < n; ++j)
        if (!passive[j] && w[j] > threshold) {
          enter = static_cast<int>(j);
          break;
        }
    }
    if (enter < 0) break;  // KKT conditions hold

    passive[static_cast<index_t>(enter)] = true;
    if (++swaps > cap) {
      cycled = true;
      break;
    }
    if (!seen.insert(passive).second) bland = true;

    for (;;) {
      std::vector<index_t> idx;
      for (index_t j = 0; j < n; ++j)
        if (passive[j]) idx.push_back(j);
      std::vector<double> z;
      if (!detail::solve_passive(gtg, gtc, idx, &z)) {
        // hopelessly singular passive set: drop the newest variable
        passive[static_cast<index_t>(enter)] = false;
        cycled = true;
        break;
      }
      bool interior = true;
      for (double v : z)
        if (v <= 0.0) interior = false;
      if (interior) {
        std::fill(x.begin(), x.end(), 0.0);
        for (index_t k = 0; k < idx.size(); ++k) x[idx[k]] = z[k];
        break;
      }
      double alpha = std::numeric_limits<double>::infinity();
      index_t hit = n;
      for (index_t k = 0; k < idx.size(); ++k) {
        if (z[k] > 0.0) continue;
        const double denom = x[idx[k]] - z[k];
        const double a = denom > 0.0 ? x[idx[k]] / denom : 0.0;
        if (a < alpha) {
          alpha = a;
          hit = idx[k];
        }
      }
      for (index_t k = 0; k < idx.size(); ++k)
        x[idx[k]] += alpha * (z[k] - x[idx[k]]);
      if (hit < n) x[hit] = 0.0;
      for (index_t j : idx) {
        if (x[j] <= 0.0) {
          x[j] = 0.0;
          if (passive[j]) {
            passive[j] = false;
            ++swaps;
          }
        }
      }
      if (swaps > cap) {
        cycled = true;
        break;
      }
    }
    const double q = objective(x);
    if (q < best_q) {
      best_q = q;
      best_x = x;
    }
    if (cycled) break;
  }

  NnlsSolution sol;
  sol.swaps = swaps;
  sol.cycled = cycled;
  if (cycled) {
    const double q = objective(x);
    sol.x = q < best_q ? x : best_x;
  } else {
    sol.x = x;
  }
  return sol;
}

inline NnlsSolution nnls(const NnlsProblem& pb, double tol = 1e-10) {
  require(pb.G.rows == pb.c.size(), "nnls: G rows and c length differ");
  require(pb.G.cols >= 1, "nnls: G needs at least one column");
  DenseMatrix gtg = gram_cols(pb.G);
  std::vector<double> gtc(pb.G.cols, 0.0);
  for (index_t i = 0; i < pb.G.rows; ++i) {
    auto gi = pb.G.row(i);
    for (index_t j = 0; j < pb.G.cols; ++j) gtc[j] += gi[j] * pb.c[i];
  }
  return nnls_normal(gtg, gtc, tol);
}

// argmin_{W >= 0} ||M - WH||_F, row by row: row i of W solves an independent
// NNLS with G = H^T and c = the i-th row of M, so G^T G = H H^T is shared and
// G^T c is the i-th row of M H^T.
inline DenseMatrix nnls_factor(const Matrix& m, const DenseMatrix& h, double tol = 1e-10) {
  require(h.cols == cols(m), "nnls_factor: H.cols != M.cols");
  for (index_t p = 0; p < h.rows; ++p) {
    bool nonzero = false;
    for (double v : h.row(p))
      if (v != 0.0) nonzero = true;
    require(nonzero, "nnls_factor: H row " + std::to_string(p) + " is all zero");
  }
  const DenseMatrix gtg = gram(h);
  const DenseMatrix a = right_product(m, h);
  DenseMatrix w(rows(m), h.rows);
  for (index_t i = 0; i < w.rows; ++i) {
    std::vector<double> gtc(a.row(i).begin(), a.row(i).end());
    NnlsSolution sol = nnls_normal(gtg, gtc, tol);
    if (sol.cycled)
      throw std::runtime_error("nnls_factor: active set cycled on row " + std::to_string(i));
    std::copy(sol.x.begin(), sol.x.end(), w.row(i).begin());
  }
  return w;
}

struct InnerErrorCurve {
  std::vector<double> values;  // E(l) for l = 0..L
  bool degenerate = false;     // start was already optimal
  double e_start = 0.0;
  double e_min = 0.0;
};

// Relative error of the inner iterates on one W subproblem, normalized so the
// start sits at 1 and the exact NNLS optimum at 0.
inline InnerErrorCurve inner_error_curve(const Matrix& m, const DenseMatrix& h,
                                         const DenseMatrix& w0, Algo algo, int count,
                                         const Safeguards& sg = {}, const PgParams& pp = {}) {
  require(count >= 0, "inner_error_curve: count must be >= 0");
  require(w0.rows == rows(m) && h.cols == cols(m) && w0.cols == h.rows,
          "inner_error_curve: shapes not conformal");
  const double msq = frob_sq(m);
  const DenseMatrix a = right_product(m, h);
  const DenseMatrix b = gram(h);
  const DenseMatrix wstar = nnls_factor(m, h);

  InnerErrorCurve out;
  out.e_min = frob_error_from(msq, a, b, wstar);
  out.e_start = frob_error_from(msq, a, b, w0);
  out.values.assign(static_cast<std::size_t>(count) + 1, 0.0);
  const double gap = out.e_start - out.e_min;
  if (gap <= 1e-12 * std::max(1.0, out.e_start)) {
    out.degenerate = true;
    return out;
  }
  out.values[0] = 1.0;
  DenseMatrix w = w0;
  if (algo == Algo::MU && sg.delta > 0.0)
    for (double& v : w.values) v = std::max(v, sg.delta);
  double pg_step = pp.initial_step;
  for (int l = 1; l <= count; ++l) {
    w = apply_update(algo, w, a, b, sg, pp, pg_step);
    const double e = frob_error_from(msq, a, b, w);
    out.values[static_cast<std::size_t>(l)] = std::max(0.0, (e - out.e_min) / gap);
  }
  return out;
}

}  // namespace anmf
