#pragma once

// Flop-ratio model behind the inner-iteration budgets. The first update of W
// after H moves must pay for A = M H^T and B = H H^T; every further update
// while H stays fixed costs only the W-sized terms. rho is the ratio of the
// two, and the budget floor(1 + alpha * rho) says how many cheap updates fit
// in roughly (1 + alpha) first-update costs.

#include <cmath>

#include "matrix.hpp"

namespace anmf {

struct CostModel {
  index_t m = 0, n = 0, r = 0, k = 0;
  double rho_w = 0.0;
  double rho_h = 0.0;
  bool rank_warning = false;  // r >= min(m, n); the model still evaluates
};

inline CostModel cost_model(index_t m, index_t n, index_t r, index_t k) {
  require(m >= 1 && n >= 1 && r >= 1, "cost_model: m, n, r must be >= 1");
  require(k <= m * n, "cost_model: K exceeds m*n");
  CostModel cm;
  cm.m = m;
  cm.n = n;
  cm.r = r;
  cm.k = k;
  const double md = static_cast<double>(m), nd = static_cast<double>(n),
               rd = static_cast<double>(r), kd = static_cast<double>(k);
  cm.rho_w = 1.0 + (kd + nd * rd) / (md * rd + md);
  cm.rho_h = 1.0 + (kd + md * rd) / (nd * rd + nd);
  cm.rank_warning = r >= std::min(m, n);
  return cm;
}

inline CostModel cost_model(const Matrix& m, index_t r) {
  return cost_model(rows(m), cols(m), r, nnz_count(m));
}

// floor(1 + alpha * rho), never below one update.
inline int inner_budget(double alpha, double rho) {
  require(alpha >= 0.0, "inner_budget: alpha must be >= 0");
  require(rho >= 1.0, "inner_budget: rho must be >= 1");
  const double b = std::floor(1.0 + alpha * rho);
  return b < 1.0 ? 1 : static_cast<int>(b);
}

}  // namespace anmf
