#pragma once

// Line-oriented key=value experiment files. '#' starts a comment; one
// `config=` line per algorithm variant. See the README for the full grammar.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "experiment.hpp"

namespace anmf {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

inline double want_double(const std::string& v, const std::string& what) {
  bool ok = false;
  const double d = parse_double(v, &ok);
  if (!ok) throw std::runtime_error("cannot parse " + what + ": '" + v + "'");
  return d;
}

inline long long want_int(const std::string& v, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::runtime_error("");
    return i;
  } catch (const std::exception&) {
    throw std::runtime_error("cannot parse " + what + ": '" + v + "'");
  }
}

}  // namespace detail

// dataset=synth:<kind>,<m>,<n>,<r_true>,<density>,<noise>  or  dataset=file:<fmt>:<path>
inline DatasetSpec parse_dataset(const std::string& value) {
  DatasetSpec ds;
  if (value.rfind("file:", 0) == 0) {
    const std::string rest = value.substr(5);
    const std::size_t colon = rest.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("dataset file form is file:<mm|csv|raw>:<path>");
    ds.is_file = true;
    ds.format = format_from(rest.substr(0, colon));
    ds.path = rest.substr(colon + 1);
    return ds;
  }
  if (value.rfind("synth:", 0) == 0) {
    const auto parts = detail::split(value.substr(6), ',');
    if (parts.size() != 6)
      throw std::runtime_error("dataset synth form is synth:<kind>,<m>,<n>,<r>,<density>,<noise>");
    ds.is_file = false;
    ds.kind = synth_kind_from(parts[0]);
    ds.m = static_cast<index_t>(detail::want_int(parts[1], "synth m"));
    ds.n = static_cast<index_t>(detail::want_int(parts[2], "synth n"));
    ds.r_true = static_cast<index_t>(detail::want_int(parts[3], "synth r"));
    ds.density = detail::want_double(parts[4], "synth density");
    ds.noise = detail::want_double(parts[5], "synth noise");
    return ds;
  }
  throw std::runtime_error("dataset must start with synth: or file:");
}

// config=<mu|hals|pg>[,alpha=..][,epsilon=..][,delta=..][,label=..][,rho=model|measured]
inline AccelConfig parse_config_line(const std::string& value) {
  const auto parts = detail::split(value, ',');
  if (parts.empty()) throw std::runtime_error("empty config line");
  AccelConfig cfg;
  const std::string algo = detail::trim(parts[0]);
  if (algo == "mu") cfg.algo = Algo::MU;
  else if (algo == "hals") cfg.algo = Algo::HALS;
  else if (algo == "pg") cfg.algo = Algo::PG;
  else throw std::runtime_error("unknown algorithm '" + algo + "' (expected mu|hals|pg)");
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string item = detail::trim(parts[i]);
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config option '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    if (key == "alpha") cfg.alpha = detail::want_double(val, "alpha");
    else if (key == "epsilon") cfg.epsilon = detail::want_double(val, "epsilon");
    else if (key == "delta") cfg.safeguards.delta = detail::want_double(val, "delta");
    else if (key == "label") cfg.label = val;
    else if (key == "rho") cfg.use_measured_rho = val == "measured";
    else throw std::runtime_error("unknown config option '" + key + "'");
  }
  return cfg;
}

inline ExperimentSpec parse_experiment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  ExperimentSpec spec;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw detail::parse_error(path, lineno, "expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    try {
      if (key == "dataset") spec.dataset = parse_dataset(value);
      else if (key == "dataset_seed")
        spec.dataset.seed = static_cast<std::uint64_t>(detail::want_int(value, "dataset_seed"));
      else if (key == "rank") spec.rank = static_cast<index_t>(detail::want_int(value, "rank"));
      else if (key == "seeds") {
        for (const auto& s : detail::split(value, ','))
          spec.seeds.push_back(static_cast<std::uint64_t>(detail::want_int(detail::trim(s), "seed")));
      } else if (key == "nseeds") {
        const long long n = detail::want_int(value, "nseeds");
        for (long long s = 0; s < n; ++s) spec.seeds.push_back(static_cast<std::uint64_t>(s));
      } else if (key == "max_outer") spec.max_outer = detail::want_int(value, "max_outer");
      else if (key == "time_budget") spec.time_budget = detail::want_double(value, "time_budget");
      else if (key == "grid_points")
        spec.grid_points = static_cast<int>(detail::want_int(value, "grid_points"));
      else if (key == "out") spec.out_dir = value;
      else if (key == "config") spec.configs.push_back(parse_config_line(value));
      else throw std::runtime_error("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw detail::parse_error(path, lineno, e.what());
    } catch (const std::runtime_error& e) {
      throw detail::parse_error(path, lineno, e.what());
    }
  }
  return spec;
}

}  // namespace anmf
