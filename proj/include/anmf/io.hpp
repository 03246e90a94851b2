#pragma once

// File formats: MatrixMarket coordinate and dense CSV / raw float64 loaders
// (all reject negative entries, since every algorithm here assumes M >= 0),
// trace CSV round-tripping, curve CSV, and flat key=value summaries.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "accel.hpp"
#include "matrix.hpp"

namespace anmf {

enum class MatrixFormat { MatrixMarket, DenseCsv, RawF64 };

inline MatrixFormat format_from(const std::string& s) {
  if (s == "mm") return MatrixFormat::MatrixMarket;
  if (s == "csv") return MatrixFormat::DenseCsv;
  if (s == "raw") return MatrixFormat::RawF64;
  throw std::invalid_argument("unknown matrix format: " + s + " (expected mm|csv|raw)");
}

namespace detail {

inline std::runtime_error parse_error(const std::string& path, std::size_t line,
                                      const std::string& msg) {
  return std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

inline bool blank(const std::string& s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

inline double parse_double(const std::string& s, bool* ok) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    *ok = used == s.size();
    return v;
  } catch (const std::exception&) {
    *ok = false;
    return 0.0;
  }
}

// shortest decimal form that round-trips a double
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Coordinate MatrixMarket, 1-based indices, duplicates summed. The banner
// line is optional; when present it must announce a real or integer general
// coordinate matrix.
inline Matrix load_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  bool size_done = false;
  long long m = 0, n = 0, declared = 0;
  std::vector<std::tuple<index_t, index_t, double>> trips;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("%%MatrixMarket", 0) == 0) {
      std::istringstream ss(line);
      std::string tag, obj, fmt, field, sym;
      ss >> tag >> obj >> fmt >> field >> sym;
      for (auto* s : {&obj, &fmt, &field, &sym})
        for (char& c : *s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (obj != "matrix" || fmt != "coordinate")
        throw detail::parse_error(path, lineno, "only coordinate matrices are supported");
      if (field != "real" && field != "integer")
        throw detail::parse_error(path, lineno, "only real or integer entries are supported");
      if (sym != "general")
        throw detail::parse_error(path, lineno, "only general symmetry is supported");
      continue;
    }
    if (!line.empty() && line[0] == '%') continue;
    if (detail::blank(line)) continue;
    std::istringstream ss(line);
    if (!size_done) {
      if (!(ss >> m >> n >> declared) || m <= 0 || n <= 0 || declared < 0)
        throw detail::parse_error(path, lineno, "malformed size header (want: rows cols nnz)");
      size_done = true;
      continue;
    }
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(ss >> i >> j >> v))
      throw detail::parse_error(path, lineno, "malformed coordinate entry (want: i j value)");
    if (i < 1 || i > m || j < 1 || j > n)
      throw detail::parse_error(path, lineno,
                                "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") outside declared " + std::to_string(m) + "x" +
                                    std::to_string(n) + " shape");
    if (v < 0.0)
      throw detail::parse_error(path, lineno,
                                "negative entry " + detail::g17(v) + " at (" + std::to_string(i) +
                                    "," + std::to_string(j) + "); input must be nonnegative");
    trips.emplace_back(static_cast<index_t>(i - 1), static_cast<index_t>(j - 1), v);
  }
  if (!size_done) throw std::runtime_error(path + ": missing size header");
  if (static_cast<long long>(trips.size()) != declared)
    throw std::runtime_error(path + ": header declares " + std::to_string(declared) +
                             " entries, file has " + std::to_string(trips.size()));
  return SparseMatrix::from_triplets(static_cast<index_t>(m), static_cast<index_t>(n),
                                     std::move(trips));
}

inline Matrix load_dense_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> vals;
  index_t nrows = 0, ncols = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    std::vector<double> row;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      const std::string cell = line.substr(start, comma == std::string::npos ? comma : comma - start);
      bool ok = false;
      const double v = detail::parse_double(cell, &ok);
      if (!ok) throw detail::parse_error(path, lineno, "cannot parse value '" + cell + "'");
      if (v < 0.0)
        throw detail::parse_error(path, lineno,
                                  "negative entry " + detail::g17(v) + " in column " +
                                      std::to_string(row.size() + 1) +
                                      "; input must be nonnegative");
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (nrows == 0) {
      ncols = row.size();
    } else if (row.size() != ncols) {
      throw detail::parse_error(path, lineno,
                                "expected " + std::to_string(ncols) + " columns, found " +
                                    std::to_string(row.size()));
    }
    vals.insert(vals.end(), row.begin(), row.end());
    ++nrows;
  }
  if (nrows == 0) throw std::runtime_error(path + ": empty file");
  DenseMatrix d(nrows, ncols);
  d.values = std::move(vals);
  return d;
}

// Raw float64: two little-endian uint64 (rows, cols) followed by rows*cols
// doubles in row-major order.
inline void write_raw_f64(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::uint64_t dims[2] = {m.rows, m.cols};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.write(reinterpret_cast<const char*>(m.values.data()),
            static_cast<std::streamsize>(m.values.size() * sizeof(double)));
}

inline Matrix load_raw_f64(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t dims[2] = {0, 0};
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || dims[0] == 0 || dims[1] == 0)
    throw std::runtime_error(path + ": malformed raw header");
  DenseMatrix d(dims[0], dims[1]);
  in.read(reinterpret_cast<char*>(d.values.data()),
          static_cast<std::streamsize>(d.values.size() * sizeof(double)));
  if (!in) throw std::runtime_error(path + ": truncated raw payload");
  for (index_t i = 0; i < d.rows; ++i)
    for (index_t j = 0; j < d.cols; ++j)
      if (d(i, j) < 0.0)
        throw std::runtime_error(path + ": negative entry " + detail::g17(d(i, j)) + " at (" +
                                 std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                 "); input must be nonnegative");
  return d;
}

inline Matrix load_matrix(const std::string& path, MatrixFormat fmt) {
  switch (fmt) {
    case MatrixFormat::MatrixMarket: return load_matrix_market(path);
    case MatrixFormat::DenseCsv: return load_dense_csv(path);
    case MatrixFormat::RawF64: return load_raw_f64(path);
  }
  throw std::invalid_argument("load_matrix: unknown format");
}

inline void write_trace_csv(const std::string& path, const RunTrace& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# algo=" << algo_name(t.config.algo) << " alpha=" << detail::g17(t.config.alpha)
      << " epsilon=" << detail::g17(t.config.epsilon)
      << " delta=" << detail::g17(t.config.safeguards.delta) << " seed=" << t.config.seed << "\n";
  out << "# m=" << t.cost.m << " n=" << t.cost.n << " r=" << t.cost.r << " K=" << t.cost.k
      << " rho_w=" << detail::g17(t.rho_w_used) << " rho_h=" << detail::g17(t.rho_h_used)
      << " rho_source=" << (t.rho_measured ? "measured" : "model") << " budget_w=" << t.budget_w
      << " budget_h=" << t.budget_h << "\n";
  out << "outer_iter,elapsed_s,error,w_inner,h_inner\n";
  for (std::size_t i = 0; i < t.samples.size(); ++i) {
    const int wi = i == 0 ? 0 : t.inner_counts[i - 1].w;
    const int hi = i == 0 ? 0 : t.inner_counts[i - 1].h;
    out << i << "," << detail::g17(t.samples[i].elapsed) << "," << detail::g17(t.samples[i].error)
        << "," << wi << "," << hi << "\n";
  }
}

struct LoadedTrace {
  std::vector<TraceSample> samples;
  std::vector<InnerCounts> inner_counts;
};

inline LoadedTrace load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  LoadedTrace t;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header row
      continue;
    }
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw detail::parse_error(path, lineno, "expected 5 columns");
    bool ok1 = false, ok2 = false;
    TraceSample s;
    s.elapsed = detail::parse_double(cells[1], &ok1);
    s.error = detail::parse_double(cells[2], &ok2);
    if (!ok1 || !ok2) throw detail::parse_error(path, lineno, "cannot parse sample");
    t.samples.push_back(s);
    if (cells[0] != "0")
      t.inner_counts.push_back({std::stoi(cells[3]), std::stoi(cells[4])});
  }
  return t;
}

inline void write_summary(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

}  // namespace anmf
