#pragma once

// The three kernels every factor update needs: A = M H^T, the Gram B = H H^T,
// and a Frobenius-error evaluator that works from those products instead of
// forming the m x n residual. A dedicated W^T M kernel serves the H side so
// M^T is never materialized. All kernels are single-threaded and deterministic.

#include <atomic>
#include <cstdint>

#include "matrix.hpp"

namespace anmf {

// Counts evaluations of the kernels that read the data matrix M. The whole
// accelerated scheme is built around spending exactly one M H^T and one W^T M
// per outer iteration; tests pin that with this counter.
namespace kernel_stats {
inline std::atomic<std::uint64_t> m_product_count{0};
inline void reset() { m_product_count.store(0); }
inline std::uint64_t m_products() { return m_product_count.load(); }
}  // namespace kernel_stats

// B = H H^T for H (r x n). Only the upper triangle is computed; the lower is
// mirrored, so the result is symmetric bitwise.
inline DenseMatrix gram(const DenseMatrix& h) {
  require(h.rows >= 1, "gram: H must have at least one row");
  const index_t r = h.rows;
  DenseMatrix b(r, r);
  for (index_t p = 0; p < r; ++p) {
    auto hp = h.row(p);
    for (index_t q = p; q < r; ++q) {
      auto hq = h.row(q);
      double s = 0.0;
      for (index_t j = 0; j < h.cols; ++j) s += hp[j] * hq[j];
      b(p, q) = s;
      b(q, p) = s;
    }
  }
  return b;
}

// W^T W for W (m x r); Gram of the columns, accumulated row by row so the
// scan stays contiguous in row-major storage. Symmetric bitwise.
inline DenseMatrix gram_cols(const DenseMatrix& w) {
  const index_t r = w.cols;
  DenseMatrix b(r, r);
  for (index_t i = 0; i < w.rows; ++i) {
    auto wi = w.row(i);
    for (index_t p = 0; p < r; ++p) {
      const double wip = wi[p];
      if (wip == 0.0) continue;
      for (index_t q = p; q < r; ++q) b(p, q) += wip * wi[q];
    }
  }
  for (index_t p = 0; p < r; ++p)
    for (index_t q = p + 1; q < r; ++q) b(q, p) = b(p, q);
  return b;
}

inline DenseMatrix matmul(const DenseMatrix& x, const DenseMatrix& y) {
  require(x.cols == y.rows, "matmul: inner dimensions differ");
  DenseMatrix out(x.rows, y.cols);
  // the common shape here is a tall x against a tiny y (W times an r x r
  // Gram); register-accumulated dots beat the row-update form for that
  for (index_t i = 0; i < x.rows; ++i) {
    auto xi = x.row(i);
    auto oi = out.row(i);
    for (index_t j = 0; j < y.cols; ++j) {
      double s = 0.0;
      for (index_t k = 0; k < x.cols; ++k) s += xi[k] * y.values[k * y.cols + j];
      oi[j] = s;
    }
  }
  return out;
}

// A = M H^T (m x r), dense M.
inline DenseMatrix right_product(const DenseMatrix& m, const DenseMatrix& h) {
  require(m.cols == h.cols, "right_product: M.cols != H.cols");
  kernel_stats::m_product_count.fetch_add(1);
  const index_t r = h.rows;
  DenseMatrix a(m.rows, r);
  for (index_t i = 0; i < m.rows; ++i) {
    auto mi = m.row(i);
    auto ai = a.row(i);
    for (index_t p = 0; p < r; ++p) {
      auto hp = h.row(p);
      double s = 0.0;
      for (index_t j = 0; j < m.cols; ++j) s += mi[j] * hp[j];
      ai[p] = s;
    }
  }
  return a;
}

// A = M H^T, CSR M; touches only the stored entries, so the cost is K*r.
inline DenseMatrix right_product(const SparseMatrix& m, const DenseMatrix& h) {
  require(m.cols == h.cols, "right_product: M.cols != H.cols");
  kernel_stats::m_product_count.fetch_add(1);
  const index_t r = h.rows;
  DenseMatrix a(m.rows, r);
  for (index_t i = 0; i < m.rows; ++i) {
    auto ai = a.row(i);
    for (index_t t = m.row_offsets[i]; t < m.row_offsets[i + 1]; ++t) {
      const index_t j = m.col_indices[t];
      const double v = m.values[t];
      for (index_t p = 0; p < r; ++p) ai[p] += v * h(p, j);
    }
  }
  return a;
}

inline DenseMatrix right_product(const Matrix& m, const DenseMatrix& h) {
  return std::visit([&](const auto& x) { return right_product(x, h); }, m);
}

// W^T M (r x n), dense M.
inline DenseMatrix left_product(const DenseMatrix& w, const DenseMatrix& m) {
  require(w.rows == m.rows, "left_product: W.rows != M.rows");
  kernel_stats::m_product_count.fetch_add(1);
  const index_t r = w.cols;
  DenseMatrix out(r, m.cols);
  for (index_t i = 0; i < m.rows; ++i) {
    auto wi = w.row(i);
    auto mi = m.row(i);
    for (index_t p = 0; p < r; ++p) {
      const double wip = wi[p];
      if (wip == 0.0) continue;
      auto op = out.row(p);
      for (index_t j = 0; j < m.cols; ++j) op[j] += wip * mi[j];
    }
  }
  return out;
}

// W^T M, CSR M.
inline DenseMatrix left_product(const DenseMatrix& w, const SparseMatrix& m) {
  require(w.rows == m.rows, "left_product: W.rows != M.rows");
  kernel_stats::m_product_count.fetch_add(1);
  const index_t r = w.cols;
  DenseMatrix out(r, m.cols);
  for (index_t i = 0; i < m.rows; ++i) {
    auto wi = w.row(i);
    for (index_t t = m.row_offsets[i]; t < m.row_offsets[i + 1]; ++t) {
      const index_t j = m.col_indices[t];
      const double v = m.values[t];
      for (index_t p = 0; p < r; ++p) out(p, j) += wi[p] * v;
    }
  }
  return out;
}

inline DenseMatrix left_product(const DenseMatrix& w, const Matrix& m) {
  return std::visit([&](const auto& x) { return left_product(w, x); }, m);
}

inline double dot(const DenseMatrix& x, const DenseMatrix& y) {
  require(x.same_shape(y), "dot: shape mismatch");
  double s = 0.0;
  for (index_t i = 0; i < x.values.size(); ++i) s += x.values[i] * y.values[i];
  return s;
}

inline double frob_sq(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.values) s += v * v;
  return s;
}

inline double frob_sq(const SparseMatrix& m) {
  double s = 0.0;
  for (double v : m.values) s += v * v;
  return s;
}

inline double frob_sq(const Matrix& m) {
  return std::visit([](const auto& x) { return frob_sq(x); }, m);
}

inline double frob_norm(const DenseMatrix& m) { return std::sqrt(frob_sq(m)); }

inline double frob_diff(const DenseMatrix& x, const DenseMatrix& y) {
  require(x.same_shape(y), "frob_diff: shape mismatch");
  double s = 0.0;
  for (index_t i = 0; i < x.values.size(); ++i) {
    const double d = x.values[i] - y.values[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// ||M - WH||_F from cached pieces:
//   ||M - WH||_F^2 = ||M||_F^2 - 2<A, W> + <W^T W, B>
// with A = M H^T and B = H H^T. Round-off can push the squared value slightly
// negative near an exact fit, so it is clamped at zero before the square root.
inline double frob_error_from(double msq, const DenseMatrix& a, const DenseMatrix& b,
                              const DenseMatrix& w) {
  const double e2 = msq - 2.0 * dot(a, w) + dot(gram_cols(w), b);
  return std::sqrt(std::max(0.0, e2));
}

inline double frob_error(const Matrix& m, const DenseMatrix& w, const DenseMatrix& h,
                         const DenseMatrix* a = nullptr, const DenseMatrix* b = nullptr,
                         const double* msq = nullptr) {
  require(w.rows == rows(m) && h.cols == cols(m) && w.cols == h.rows,
          "frob_error: shapes not conformal");
  if (a) require(a->rows == w.rows && a->cols == w.cols, "frob_error: A shape mismatch");
  if (b) require(b->rows == h.rows && b->cols == h.rows, "frob_error: B shape mismatch");
  const double m2 = msq ? *msq : frob_sq(m);
  DenseMatrix a_local, b_local;
  if (!a) {
    a_local = right_product(m, h);
    a = &a_local;
  }
  if (!b) {
    b_local = gram(h);
    b = &b_local;
  }
  return frob_error_from(m2, *a, *b, w);
}

}  // namespace anmf
