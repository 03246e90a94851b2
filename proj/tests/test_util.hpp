#pragma once

// Shared helpers for the test suites: seeded random instances and small
// independent oracles (explicit dense error evaluation, brute-force NNLS by
// active-set enumeration, a plain unaccelerated outer loop). The oracles
// deliberately avoid the library's cached-product code paths.

#include <cmath>
#include <random>
#include <tuple>
#include <vector>

#include "anmf/anmf.hpp"

namespace testutil {

using anmf::DenseMatrix;
using anmf::index_t;
using anmf::Matrix;
using anmf::SparseMatrix;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double u01(std::mt19937_64& g) { return anmf::uniform01(g); }

inline DenseMatrix random_dense(index_t rows, index_t cols, std::mt19937_64& g) {
  DenseMatrix m(rows, cols);
  for (double& v : m.values) v = u01(g);
  return m;
}

inline SparseMatrix random_sparse(index_t rows, index_t cols, double density,
                                  std::mt19937_64& g) {
  std::vector<std::tuple<index_t, index_t, double>> trips;
  for (index_t i = 0; i < rows; ++i)
    for (index_t j = 0; j < cols; ++j)
      if (u01(g) < density) trips.emplace_back(i, j, u01(g));
  return SparseMatrix::from_triplets(rows, cols, std::move(trips));
}

// ||M - WH||_F the slow way: form the product entry by entry.
inline double dense_error_oracle(const DenseMatrix& m, const DenseMatrix& w,
                                 const DenseMatrix& h) {
  double s = 0.0;
  for (index_t i = 0; i < m.rows; ++i)
    for (index_t j = 0; j < m.cols; ++j) {
      double wh = 0.0;
      for (index_t p = 0; p < w.cols; ++p) wh += w(i, p) * h(p, j);
      const double d = m(i, j) - wh;
      s += d * d;
    }
  return std::sqrt(s);
}

inline double dense_error_oracle(const Matrix& m, const DenseMatrix& w, const DenseMatrix& h) {
  return dense_error_oracle(anmf::densify(m), w, h);
}

// Least squares min ||G_S x_S - c|| on a column subset via modified
// Gram-Schmidt QR; returns false if the subset is numerically rank deficient.
inline bool subset_least_squares(const DenseMatrix& g, const std::vector<double>& c,
                                 const std::vector<index_t>& subset, std::vector<double>* x) {
  const index_t rows = g.rows, k = subset.size();
  std::vector<std::vector<double>> q(k, std::vector<double>(rows));
  std::vector<std::vector<double>> r(k, std::vector<double>(k, 0.0));
  for (index_t j = 0; j < k; ++j) {
    for (index_t i = 0; i < rows; ++i) q[j][i] = g(i, subset[j]);
    for (index_t l = 0; l < j; ++l) {
      double proj = 0.0;
      for (index_t i = 0; i < rows; ++i) proj += q[l][i] * q[j][i];
      r[l][j] = proj;
      for (index_t i = 0; i < rows; ++i) q[j][i] -= proj * q[l][i];
    }
    double norm = 0.0;
    for (index_t i = 0; i < rows; ++i) norm += q[j][i] * q[j][i];
    norm = std::sqrt(norm);
    if (norm < 1e-12) return false;
    r[j][j] = norm;
    for (index_t i = 0; i < rows; ++i) q[j][i] /= norm;
  }
  std::vector<double> qtc(k, 0.0);
  for (index_t j = 0; j < k; ++j)
    for (index_t i = 0; i < rows; ++i) qtc[j] += q[j][i] * c[i];
  x->assign(k, 0.0);
  for (index_t j = k; j-- > 0;) {
    double s = qtc[j];
    for (index_t l = j + 1; l < k; ++l) s -= r[j][l] * (*x)[l];
    (*x)[j] = s / r[j][j];
  }
  return true;
}

inline double residual_sq(const DenseMatrix& g, const std::vector<double>& c,
                          const std::vector<double>& x) {
  double s = 0.0;
  for (index_t i = 0; i < g.rows; ++i) {
    double gx = 0.0;
    for (index_t j = 0; j < g.cols; ++j) gx += g(i, j) * x[j];
    const double d = gx - c[i];
    s += d * d;
  }
  return s;
}

// Brute-force NNLS: enumerate all 2^n free-variable subsets, solve each
// equality-constrained least squares, keep the feasible solution with the
// smallest residual. Only sane for n <= ~12.
inline std::vector<double> brute_force_nnls(const DenseMatrix& g, const std::vector<double>& c) {
  const index_t n = g.cols;
  std::vector<double> best(n, 0.0);
  double best_res = residual_sq(g, c, best);  // empty subset: x = 0
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<index_t> subset;
    for (index_t j = 0; j < n; ++j)
      if (mask & (1u << j)) subset.push_back(j);
    std::vector<double> xs;
    if (!subset_least_squares(g, c, subset, &xs)) continue;
    bool feasible = true;
    for (double v : xs)
      if (v < -1e-12) feasible = false;
    if (!feasible) continue;
    std::vector<double> x(n, 0.0);
    for (index_t k = 0; k < subset.size(); ++k) x[subset[k]] = std::max(0.0, xs[k]);
    const double res = residual_sq(g, c, x);
    if (res < best_res) {
      best_res = res;
      best = x;
    }
  }
  return best;
}

// One unaccelerated outer iteration: fresh products, a single update per
// side. Reference path for the alpha = 0 equivalence checks.
inline void plain_outer_iteration(const Matrix& m, DenseMatrix& w, DenseMatrix& h,
                                  anmf::Algo algo, const anmf::Safeguards& sg = {},
                                  const anmf::PgParams& pp = {}) {
  double step = pp.initial_step;
  const DenseMatrix a = anmf::right_product(m, h);
  const DenseMatrix b = anmf::gram(h);
  w = anmf::apply_update(algo, w, a, b, sg, pp, step);
  const DenseMatrix at = anmf::transpose(anmf::left_product(w, m));
  const DenseMatrix bh = anmf::gram_cols(w);
  DenseMatrix ht = anmf::transpose(h);
  step = pp.initial_step;
  ht = anmf::apply_update(algo, ht, at, bh, sg, pp, step);
  h = anmf::transpose(ht);
}

}  // namespace testutil
