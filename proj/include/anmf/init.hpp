#pragma once

// Seeded factor initialization: i.i.d. uniform [0,1) entries, then both
// factors rescaled so the best scalar multiple of W H fitting M is exactly 1.
// Without the rescale a random product is badly mis-scaled and the first
// update of any algorithm erases most of the initial gap on its own.

#include <cmath>
#include <random>
#include <stdexcept>

#include "kernels.hpp"
#include "matrix.hpp"

namespace anmf {

// 53-bit uniform in [0,1); built from raw bits so draws do not depend on the
// standard library's distribution implementation.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline FactorPair init_factors(index_t m, index_t n, index_t r, std::uint64_t seed,
                               const Matrix& data) {
  require(r >= 1, "init_factors: rank must be >= 1");
  require(rows(data) == m && cols(data) == n, "init_factors: M shape mismatch");
  for (int attempt = 0; attempt < 10; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
    DenseMatrix w(m, r), h(r, n);
    for (double& v : w.values) v = uniform01(rng);
    for (double& v : h.values) v = uniform01(rng);
    const double num = dot(right_product(data, h), w);  // <M, WH>
    const double den = dot(gram_cols(w), gram(h));      // ||WH||^2
    if (num <= 0.0 || den <= 0.0) continue;             // pathological draw, redraw
    const double s = std::sqrt(num / den);
    for (double& v : w.values) v *= s;
    for (double& v : h.values) v *= s;
    return {std::move(w), std::move(h)};
  }
  throw std::runtime_error("init_factors: <M, WH> stayed zero after 10 redraws");
}

}  // namespace anmf
