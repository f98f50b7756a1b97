#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rough/io.hpp"
#include "rough/marginals.hpp"
#include "rough/partition.hpp"
#include "rough/sampler.hpp"

namespace rough::cli {

/// Raised for any schema or value problem; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PartitionSection {
  PartitionKind kind = PartitionKind::dyadic;
  int depth = 15;  ///< finest level; coefficient levels are 0..depth-1
  double ratio = 2.5;
  double T = 1.0;
  std::string file;  ///< custom sequences are read from this JSON file
};

struct ModelSection {
  std::optional<double> H;
  MarginalSpec marginal = MarginalSpec::single(MarginalLaw::standard_normal);
  bool pearson_correct = false;
  bool include_endpoint = false;
  std::string example;  ///< "a" or "b" for the deterministic fields
  double epsilon0 = 0.2;
};

struct RunSection {
  std::uint64_t seed = 0;
  std::size_t count = 1;
  bool dump_coeffs = false;
};

struct AnalysisSection {
  std::optional<double> alpha;
  std::vector<double> p_grid{1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 8.0};
  int window = 6;
  std::optional<int> window_first;
  std::optional<int> window_last;
  double slope_tol = 0.05;
  std::vector<double> test_points;
  int test_point_count = 10;
  std::vector<int> levels;  ///< variation-index levels; default: last six
  std::size_t path_index = 0;
};

struct ExperimentConfig {
  PartitionSection partition;
  ModelSection model;
  RunSection run;
  AnalysisSection analysis;
  nlohmann::json source;  ///< the validated document, for manifests
};

/// Largest coefficient-covariance dimension accepted by the CLI.
inline constexpr std::size_t max_covariance_dim = 8192;

namespace detail {

inline void only_keys(const nlohmann::json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
}

template <class T>
T get(const nlohmann::json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

inline MarginalLaw law(const nlohmann::json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field + " must be a string");
  try {
    return marginal_law_from_string(v.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& doc) {
  using detail::get;
  ExperimentConfig cfg;
  cfg.source = doc;
  detail::only_keys(doc, "", {"partition", "model", "run", "analysis"});

  if (doc.contains("partition")) {
    const auto& p = doc["partition"];
    detail::only_keys(p, "partition", {"kind", "depth", "ratio", "T", "file"});
    if (p.contains("kind")) {
      try {
        cfg.partition.kind = partition_kind_from_string(get<std::string>(p, "kind", "partition"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("partition.kind: ") + e.what());
      }
    }
    if (p.contains("depth")) cfg.partition.depth = get<int>(p, "depth", "partition");
    if (p.contains("ratio")) cfg.partition.ratio = get<double>(p, "ratio", "partition");
    if (p.contains("T")) cfg.partition.T = get<double>(p, "T", "partition");
    if (p.contains("file")) cfg.partition.file = get<std::string>(p, "file", "partition");
  }
  if (cfg.partition.kind != PartitionKind::custom && cfg.partition.depth < 1)
    throw ConfigError("partition.depth must be >= 1");
  if (!(cfg.partition.T > 0.0)) throw ConfigError("partition.T must be positive");
  if (cfg.partition.kind == PartitionKind::shifted_binary && !(cfg.partition.ratio > 1.0))
    throw ConfigError("partition.ratio must exceed 1");
  if (cfg.partition.kind == PartitionKind::custom && cfg.partition.file.empty())
    throw ConfigError("partition.file is required for kind 'custom'");

  if (doc.contains("model")) {
    const auto& m = doc["model"];
    detail::only_keys(m, "model", {"H", "marginal", "mixing", "pearson_correct", "include_endpoint", "mask_q",
                                   "example", "epsilon0"});
    if (m.contains("H") && !m["H"].is_null()) {
      const double H = get<double>(m, "H", "model");
      if (!(H > 0.0 && H < 1.0)) throw ConfigError("model.H must lie in (0, 1), got " + m["H"].dump());
      cfg.model.H = H;
    }
    if (m.contains("marginal")) {
      if (m["marginal"] == "mixed")
        cfg.model.marginal = MarginalSpec::mixed();
      else
        cfg.model.marginal = MarginalSpec::single(detail::law(m["marginal"], "model.marginal"));
    }
    if (m.contains("mixing") && !m["mixing"].is_null()) {
      const auto& mix = m["mixing"];
      detail::only_keys(mix, "model.mixing", {"odd", "even"});
      if (mix.contains("odd")) cfg.model.marginal.odd = detail::law(mix["odd"], "model.mixing.odd");
      if (mix.contains("even")) cfg.model.marginal.even = detail::law(mix["even"], "model.mixing.even");
    }
    if (m.contains("mask_q") && !m["mask_q"].is_null()) {
      const double q = get<double>(m, "mask_q", "model");
      if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("model.mask_q must lie in [0, 1]");
      cfg.model.marginal.mask_q = q;
    }
    if (m.contains("pearson_correct")) cfg.model.pearson_correct = get<bool>(m, "pearson_correct", "model");
    if (m.contains("include_endpoint")) cfg.model.include_endpoint = get<bool>(m, "include_endpoint", "model");
    if (m.contains("example")) {
      cfg.model.example = get<std::string>(m, "example", "model");
      if (cfg.model.example != "a" && cfg.model.example != "b") throw ConfigError("model.example must be 'a' or 'b'");
    }
    if (m.contains("epsilon0")) {
      cfg.model.epsilon0 = get<double>(m, "epsilon0", "model");
      if (!(cfg.model.epsilon0 > 0.0 && cfg.model.epsilon0 < 1.0 / 3.0))
        throw ConfigError("model.epsilon0 must lie in (0, 1/3)");
    }
  }
  if (!cfg.model.example.empty()) {
    if (cfg.partition.kind != PartitionKind::dyadic) throw ConfigError("model.example needs partition.kind 'dyadic'");
    if (cfg.model.H) throw ConfigError("model.example and model.H are exclusive");
    if (cfg.model.example == "b" && cfg.partition.depth < 2) throw ConfigError("partition.depth must be >= 2");
  }
  if (cfg.model.H) {
    for (int parity = 0; parity < 2; ++parity)
      if (!is_continuous(cfg.model.marginal.law_at(parity)))
        throw ConfigError("model.marginal: threePoint is not available with model.H (copula mode)");
  }
  if (cfg.model.include_endpoint && cfg.partition.T != 1.0 && cfg.model.H)
    throw ConfigError("model.include_endpoint with model.H needs partition.T = 1");

  if (doc.contains("run")) {
    const auto& r = doc["run"];
    detail::only_keys(r, "run", {"seed", "count", "dump_coeffs"});
    if (r.contains("seed")) cfg.run.seed = get<std::uint64_t>(r, "seed", "run");
    if (r.contains("count")) {
      const auto c = get<long long>(r, "count", "run");
      if (c < 1) throw ConfigError("run.count must be >= 1");
      cfg.run.count = static_cast<std::size_t>(c);
    }
    if (r.contains("dump_coeffs")) cfg.run.dump_coeffs = get<bool>(r, "dump_coeffs", "run");
  }

  if (doc.contains("analysis")) {
    const auto& a = doc["analysis"];
    detail::only_keys(a, "analysis", {"alpha", "p_grid", "window", "slope_tol", "test_points", "test_point_count",
                                      "levels", "path_index"});
    if (a.contains("alpha") && !a["alpha"].is_null()) {
      const double al = get<double>(a, "alpha", "analysis");
      if (!(al > 0.0 && al < 1.0)) throw ConfigError("analysis.alpha must lie in (0, 1)");
      cfg.analysis.alpha = al;
    }
    if (a.contains("p_grid")) {
      cfg.analysis.p_grid = get<std::vector<double>>(a, "p_grid", "analysis");
      if (cfg.analysis.p_grid.empty()) throw ConfigError("analysis.p_grid must not be empty");
      for (std::size_t i = 0; i < cfg.analysis.p_grid.size(); ++i) {
        const double p = cfg.analysis.p_grid[i];
        if (!(p >= 1.0 && p <= 8.0)) throw ConfigError("analysis.p_grid values must lie in [1, 8]");
        if (i && !(p > cfg.analysis.p_grid[i - 1])) throw ConfigError("analysis.p_grid must be increasing");
      }
    }
    if (a.contains("window")) {
      const auto& w = a["window"];
      if (w.is_number_integer()) {
        cfg.analysis.window = w.get<int>();
        if (cfg.analysis.window < 2) throw ConfigError("analysis.window must be >= 2");
      } else if (w.is_array() && w.size() == 2 && w[0].is_number_integer() && w[1].is_number_integer()) {
        cfg.analysis.window_first = w[0].get<int>();
        cfg.analysis.window_last = w[1].get<int>();
        if (*cfg.analysis.window_first < 0 || *cfg.analysis.window_last < *cfg.analysis.window_first)
          throw ConfigError("analysis.window range is invalid");
      } else {
        throw ConfigError("analysis.window must be an integer or a [first, last] pair");
      }
    }
    if (a.contains("slope_tol")) {
      cfg.analysis.slope_tol = get<double>(a, "slope_tol", "analysis");
      if (!(cfg.analysis.slope_tol >= 0.0)) throw ConfigError("analysis.slope_tol must be >= 0");
    }
    if (a.contains("test_points")) cfg.analysis.test_points = get<std::vector<double>>(a, "test_points", "analysis");
    if (a.contains("test_point_count")) {
      cfg.analysis.test_point_count = get<int>(a, "test_point_count", "analysis");
      if (cfg.analysis.test_point_count < 1) throw ConfigError("analysis.test_point_count must be >= 1");
    }
    if (a.contains("levels")) {
      cfg.analysis.levels = get<std::vector<int>>(a, "levels", "analysis");
      if (cfg.analysis.levels.size() < 3) throw ConfigError("analysis.levels needs at least 3 entries");
    }
    if (a.contains("path_index")) cfg.analysis.path_index = get<std::size_t>(a, "path_index", "analysis");
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(doc);
}

inline PartitionSequence build_partition(const ExperimentConfig& cfg) {
  if (cfg.partition.kind == PartitionKind::custom) {
    auto seq = io::load_partition(cfg.partition.file);
    if (seq.horizon() != cfg.partition.T) throw ConfigError("partition.T differs from the horizon in partition.file");
    return seq;
  }
  return make_partition(cfg.partition.kind, cfg.partition.T, cfg.partition.depth, cfg.partition.ratio);
}

inline PathConfig path_config(const ExperimentConfig& cfg, unsigned threads) {
  PathConfig pc;
  pc.seed = cfg.run.seed;
  pc.count = cfg.run.count;
  pc.kind = cfg.partition.kind;
  pc.ratio = cfg.partition.ratio;
  pc.horizon = cfg.partition.T;
  pc.H = cfg.model.H;
  pc.marginal = cfg.model.marginal;
  pc.pearson_correct = cfg.model.pearson_correct;
  pc.include_endpoint = cfg.model.include_endpoint;
  pc.threads = threads;
  return pc;
}

/// 64-bit FNV-1a of a string.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace rough::cli
