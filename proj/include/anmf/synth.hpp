#pragma once

// Synthetic data generators: desk-scale stand-ins for the image (dense) and
// text (sparse) matrices the benchmarks are usually run on.

#include <random>
#include <string>

#include "init.hpp"
#include "kernels.hpp"
#include "matrix.hpp"

namespace anmf {

enum class SynthKind { UniformDense, PlantedLowRank, SparseUniform };

inline SynthKind synth_kind_from(const std::string& s) {
  if (s == "uniform-dense") return SynthKind::UniformDense;
  if (s == "planted-lowrank") return SynthKind::PlantedLowRank;
  if (s == "sparse-uniform") return SynthKind::SparseUniform;
  throw std::invalid_argument("unknown synthetic kind: " + s);
}

inline const char* synth_kind_name(SynthKind k) {
  switch (k) {
    case SynthKind::UniformDense: return "uniform-dense";
    case SynthKind::PlantedLowRank: return "planted-lowrank";
    case SynthKind::SparseUniform: return "sparse-uniform";
  }
  return "?";
}

inline Matrix synth_matrix(SynthKind kind, index_t m, index_t n, index_t r_true, double density,
                           double noise, std::uint64_t seed) {
  require(m >= 1 && n >= 1, "synth_matrix: m, n must be >= 1");
  std::mt19937_64 rng(seed);
  switch (kind) {
    case SynthKind::UniformDense: {
      DenseMatrix d(m, n);
      for (double& v : d.values) v = uniform01(rng);
      return d;
    }
    case SynthKind::PlantedLowRank: {
      require(r_true >= 1, "synth_matrix: r_true must be >= 1");
      require(noise >= 0.0, "synth_matrix: noise must be >= 0");
      DenseMatrix w(m, r_true), h(r_true, n);
      for (double& v : w.values) v = uniform01(rng);
      for (double& v : h.values) v = uniform01(rng);
      DenseMatrix d = matmul(w, h);
      if (noise > 0.0)
        for (double& v : d.values) v += noise * uniform01(rng);
      return d;
    }
    case SynthKind::SparseUniform: {
      require(density > 0.0 && density <= 1.0, "synth_matrix: density must be in (0, 1]");
      SparseMatrix sp;
      sp.rows = m;
      sp.cols = n;
      sp.row_offsets.assign(m + 1, 0);
      for (index_t i = 0; i < m; ++i) {
        for (index_t j = 0; j < n; ++j) {
          if (uniform01(rng) < density) {
            sp.col_indices.push_back(j);
            sp.values.push_back(uniform01(rng));
          }
        }
        sp.row_offsets[i + 1] = sp.col_indices.size();
      }
      return sp;
    }
  }
  throw std::invalid_argument("synth_matrix: unknown kind");
}

}  // namespace anmf
