#pragma once

// Dense row-major and CSR sparse storage for nonnegative matrix data,
// plus the factor pair (W, H) every algorithm in this library works on.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace anmf {

using index_t = std::size_t;

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

struct DenseMatrix {
  index_t rows = 0;
  index_t cols = 0;
  std::vector<double> values;  // row-major, rows*cols entries

  DenseMatrix() = default;
  DenseMatrix(index_t r, index_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  static DenseMatrix identity(index_t n) {
    DenseMatrix m(n, n);
    for (index_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> data) {
    DenseMatrix m(data.size(), data.size() ? data.begin()->size() : 0);
    index_t i = 0;
    for (const auto& r : data) {
      require(r.size() == m.cols, "from_rows: ragged row");
      std::copy(r.begin(), r.end(), m.values.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
      ++i;
    }
    return m;
  }

  double& operator()(index_t i, index_t j) { return values[i * cols + j]; }
  double operator()(index_t i, index_t j) const { return values[i * cols + j]; }

  std::span<double> row(index_t i) { return {values.data() + i * cols, cols}; }
  std::span<const double> row(index_t i) const { return {values.data() + i * cols, cols}; }

  index_t size() const { return rows * cols; }

  double min_entry() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : values) m = std::min(m, v);
    return m;
  }

  bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
};

inline DenseMatrix transpose(const DenseMatrix& x) {
  DenseMatrix t(x.cols, x.rows);
  for (index_t i = 0; i < x.rows; ++i)
    for (index_t j = 0; j < x.cols; ++j) t(j, i) = x(i, j);
  return t;
}

// Compressed sparse rows with strictly increasing column indices per row.
struct SparseMatrix {
  index_t rows = 0;
  index_t cols = 0;
  std::vector<index_t> row_offsets;  // rows+1, nondecreasing
  std::vector<index_t> col_indices;
  std::vector<double> values;

  index_t nnz() const { return values.size(); }

  // Builds CSR from unordered (row, col, value) triplets; duplicates are summed.
  static SparseMatrix from_triplets(index_t rows, index_t cols,
                                    std::vector<std::tuple<index_t, index_t, double>> trips) {
    for (const auto& [i, j, v] : trips) {
      (void)v;
      require(i < rows && j < cols, "from_triplets: entry out of bounds");
    }
    std::sort(trips.begin(), trips.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    SparseMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_offsets.assign(rows + 1, 0);
    for (index_t t = 0; t < trips.size();) {
      auto [i, j, v] = trips[t];
      double sum = v;
      index_t u = t + 1;
      while (u < trips.size() && std::get<0>(trips[u]) == i && std::get<1>(trips[u]) == j) {
        sum += std::get<2>(trips[u]);
        ++u;
      }
      m.col_indices.push_back(j);
      m.values.push_back(sum);
      ++m.row_offsets[i + 1];
      t = u;
    }
    for (index_t i = 0; i < rows; ++i) m.row_offsets[i + 1] += m.row_offsets[i];
    return m;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(rows, cols);
    for (index_t i = 0; i < rows; ++i)
      for (index_t t = row_offsets[i]; t < row_offsets[i + 1]; ++t)
        d(i, col_indices[t]) = values[t];
    return d;
  }

  double min_entry() const {
    double m = nnz() == rows * cols ? std::numeric_limits<double>::infinity() : 0.0;
    for (double v : values) m = std::min(m, v);
    return m;
  }
};

using Matrix = std::variant<DenseMatrix, SparseMatrix>;

inline index_t rows(const Matrix& m) {
  return std::visit([](const auto& x) { return x.rows; }, m);
}
inline index_t cols(const Matrix& m) {
  return std::visit([](const auto& x) { return x.cols; }, m);
}

// K: stored nonzero count (mn for dense storage).
inline index_t nnz_count(const Matrix& m) {
  if (const auto* s = std::get_if<SparseMatrix>(&m)) return s->nnz();
  return std::get<DenseMatrix>(m).size();
}

inline DenseMatrix densify(const Matrix& m) {
  if (const auto* s = std::get_if<SparseMatrix>(&m)) return s->to_dense();
  return std::get<DenseMatrix>(m);
}

struct FactorPair {
  DenseMatrix W;  // m x r
  DenseMatrix H;  // r x n
};

}  // namespace anmf
