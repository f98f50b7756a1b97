#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rough/cli/config.hpp"
#include "rough/fbm_model.hpp"
#include "rough/io.hpp"
#include "rough/roughness.hpp"
#include "rough/sampler.hpp"
#include "rough/stats.hpp"
#include "rough/version.hpp"

namespace rough::cli {

enum ExitCode : int { ok = 0, usage = 2, numerical = 3 };

struct Options {
  unsigned threads = default_threads();
  std::optional<std::uint64_t> seed;
};

namespace detail {

inline std::filesystem::path prepare_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = io::open_out(path.string());
  out << j.dump(2) << '\n';
}

inline nlohmann::json base_manifest(const ExperimentConfig& cfg, const std::string& command) {
  const std::string canonical = cfg.source.dump();
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  return {{"command", command},
          {"tool_version", std::string(version)},
          {"config", cfg.source},
          {"config_hash_fnv1a", hash},
          {"seed", cfg.run.seed}};
}

inline void check_covariance_size(const ExperimentConfig& cfg, const PartitionSequence& seq) {
  if (!cfg.model.H) return;
  const std::size_t dim = seq.level(seq.depth()).size() - 2 + (cfg.model.include_endpoint ? 1 : 0);
  if (dim > max_covariance_dim)
    throw ConfigError("partition.depth gives a covariance dimension of " + std::to_string(dim) + " (limit " +
                      std::to_string(max_covariance_dim) + ")");
}

inline void require_grid(const PathEnsemble& ens, const PartitionSequence& seq) {
  const auto pts = seq.level(seq.depth()).points();
  if (ens.grid.size() != pts.size() || !std::equal(pts.begin(), pts.end(), ens.grid.begin()))
    throw ConfigError("paths grid does not match the configured partition's finest level");
}

/// Variance of Y(t) for the configured generator.
inline double marginal_variance(const ExperimentConfig& cfg, double t) {
  const double T = cfg.partition.T;
  if (!cfg.model.H) return cfg.model.include_endpoint ? t : t * (T - t) / T;
  const double H = *cfg.model.H;
  return cfg.model.include_endpoint ? fbm_kernel(t, t, H) : fbm_bridge_kernel_fn(H)(t, t);
}

}  // namespace detail

/// Writes paths.csv, optional coeffs_<r>.csv and manifest.json into out_dir.
inline int cmd_generate(const ExperimentConfig& cfg_in, const std::string& out_dir, const Options& opt,
                        std::ostream& log = std::cerr) {
  ExperimentConfig cfg = cfg_in;
  if (opt.seed) cfg.run.seed = *opt.seed;
  const auto seq = build_partition(cfg);
  detail::check_covariance_size(cfg, seq);
  const auto dir = detail::prepare_dir(out_dir);
  auto manifest = detail::base_manifest(cfg, "generate");
  manifest["seed"] = cfg.run.seed;

  auto paths = io::open_out((dir / "paths.csv").string());
  if (!cfg.model.example.empty()) {
    const int depth = seq.depth();
    auto field = cfg.model.example == "a" ? deterministic_example_a(cfg.model.epsilon0, depth)
                                          : deterministic_example_b(depth);
    const SchauderBasis basis(seq, depth - 1);
    io::write_row(paths, basis.grid());
    for (std::size_t r = 0; r < cfg.run.count; ++r) {
      auto f = field;
      if (cfg.model.marginal.mask_q) {
        ReplicaRng rng(cfg.run.seed, r);
        apply_bernoulli_mask(f, *cfg.model.marginal.mask_q, rng);
      }
      io::write_row(paths, reconstruct_on_grid(f, basis));
      if (cfg.run.dump_coeffs) {
        auto out = io::open_out((dir / ("coeffs_" + std::to_string(r) + ".csv")).string());
        io::write_coefficients(out, f);
      }
    }
    manifest["generator"] = "deterministic example " + cfg.model.example;
  } else {
    PathConfig pc = path_config(cfg, opt.threads);
    pc.max_level = seq.depth() - 1;
    const PathGenerator gen(seq, pc);
    io::write_row(paths, gen.grid());
    const std::size_t width = gen.grid().size();
    const std::size_t block = std::max<std::size_t>(1, std::min<std::size_t>(256, (1u << 24) / width));
    std::vector<double> buffer;
    for (std::size_t start = 0; start < cfg.run.count; start += block) {
      const std::size_t n = std::min(block, cfg.run.count - start);
      buffer.assign(n * width, 0.0);
      parallel_for(n, opt.threads, [&](std::size_t i) {
        gen.path(start + i, std::span<double>(buffer).subspan(i * width, width));
      });
      for (std::size_t i = 0; i < n; ++i) io::write_row(paths, std::span<const double>(buffer).subspan(i * width, width));
    }
    if (cfg.run.dump_coeffs) {
      for (std::size_t r = 0; r < cfg.run.count; ++r) {
        auto out = io::open_out((dir / ("coeffs_" + std::to_string(r) + ".csv")).string());
        io::write_coefficients(out, gen.coefficients(r));
      }
    }
    manifest["generator"] = cfg.model.H ? "copula fBM coefficients" : "iid BM coefficients";
    manifest["ensemble"] = io::manifest_to_json(gen.manifest());
    manifest["covariance_jitter"] = gen.manifest().relative_jitter;
    for (const auto& w : gen.manifest().warnings) log << "warning: " << w << '\n';
  }
  manifest["grid_points"] = seq.level(seq.depth()).size();
  manifest["count"] = cfg.run.count;
  detail::write_json(dir / "manifest.json", manifest);
  return ok;
}

/// holder.csv, variation.csv and qv.csv for one path (analysis.path_index) and
/// ensemble-mean quadratic variation; prints a one-line summary.
inline int cmd_analyze(const ExperimentConfig& cfg, const std::string& paths_file, const std::string& out_dir,
                       std::ostream& out = std::cout) {
  const auto seq = build_partition(cfg);
  const auto ens = io::read_paths(paths_file);
  detail::require_grid(ens, seq);
  if (ens.count == 0) throw ConfigError("paths file holds no paths");
  if (cfg.analysis.path_index >= ens.count) throw ConfigError("analysis.path_index exceeds the path count");
  const auto dir = detail::prepare_dir(out_dir);
  const int depth = seq.depth();
  const auto sample = ens.path(cfg.analysis.path_index);

  const SchauderBasis basis(seq, depth - 1);
  const auto coeffs = decompose(sample, basis);
  HolderOptions hopt;
  hopt.trailing = cfg.analysis.window;
  hopt.first_level = cfg.analysis.window_first;
  hopt.last_level = cfg.analysis.window_last;
  hopt.slope_tol = cfg.analysis.slope_tol;
  const auto est = holder_exponent_estimate(coeffs, seq, hopt);
  {
    auto f = io::open_out((dir / "holder.csv").string());
    f << "level,max_log_theta,log_mesh,ratio\n";
    for (const auto& row : est.trace)
      f << row.m << ',' << io::format_double(row.max_log_theta) << ',' << io::format_double(row.log_mesh) << ','
        << io::format_double(row.ratio) << '\n';
  }

  std::vector<int> levels = cfg.analysis.levels;
  if (levels.empty())
    for (int n = std::max(1, depth - 5); n <= depth; ++n) levels.push_back(n);
  for (int n : levels)
    if (n < 0 || n > depth) throw ConfigError("analysis.levels entry " + std::to_string(n) + " outside 0.." + std::to_string(depth));
  const auto var = variation_index_estimate(sample, seq, cfg.analysis.p_grid, levels);
  {
    auto f = io::open_out((dir / "variation.csv").string());
    f << "p,level,sum,slope\n";
    for (std::size_t i = 0; i < var.p_values.size(); ++i)
      for (std::size_t j = 0; j < levels.size(); ++j)
        f << io::format_double(var.p_values[i]) << ',' << levels[j] << ',' << io::format_double(var.sums[i][j]) << ','
          << io::format_double(var.slopes[i]) << '\n';
  }

  const LevelPositions pos(seq);
  const double T = seq.horizon();
  {
    auto f = io::open_out((dir / "qv.csv").string());
    f << "level,qv_path,qv_mean";
    if (cfg.model.H) f << ",scaled_qv_mean";
    f << '\n';
    for (int n = 1; n <= depth; ++n) {
      double mean = 0.0;
      double scaled = 0.0;
      const bool uniform = seq.level(n).is_uniform();
      for (std::size_t r = 0; r < ens.count; ++r) {
        mean += pth_variation(ens.path(r), seq, pos, n, 2.0, T);
        if (cfg.model.H && uniform) scaled += scaled_qv(ens.path(r), seq, pos, *cfg.model.H, T, n);
      }
      mean /= static_cast<double>(ens.count);
      scaled /= static_cast<double>(ens.count);
      f << n << ',' << io::format_double(pth_variation(sample, seq, pos, n, 2.0, T)) << ',' << io::format_double(mean);
      if (cfg.model.H) f << ',' << (uniform ? io::format_double(scaled) : std::string("nan"));
      f << '\n';
    }
  }
  if (cfg.analysis.alpha) {
    const auto diag = validate(seq);
    const auto b = ciesielski_bounds(coeffs, seq, *cfg.analysis.alpha, diag);
    auto f = io::open_out((dir / "bounds.csv").string());
    f << "alpha,lower,upper,S\n"
      << io::format_double(*cfg.analysis.alpha) << ',' << io::format_double(b.lower) << ','
      << io::format_double(b.upper) << ',' << io::format_double(b.S) << '\n';
  }

  out << "alpha_hat=" << io::format_double(est.alpha_hat) << " branch=" << to_string(est.branch)
      << " index_hat=" << (var.index_hat ? io::format_double(*var.index_hat) : std::string("indeterminate"))
      << " qv=" << io::format_double(pth_variation(sample, seq, pos, depth, 2.0, T))
      << (est.degenerate ? " degenerate" : "") << '\n';
  return ok;
}

/// Draws `count` distinct interior grid points of level `level` from the seed.
inline std::vector<double> random_test_points(const PartitionSequence& seq, int count, std::uint64_t seed) {
  const auto pts = seq.level(seq.depth()).points();
  if (pts.size() < 3) throw ConfigError("grid too coarse for test points");
  ReplicaRng rng(seed, 0x7465737470747300ull);
  std::vector<std::size_t> chosen;
  const std::size_t interior = pts.size() - 2;
  const auto want = std::min<std::size_t>(static_cast<std::size_t>(count), interior);
  while (chosen.size() < want) {
    const std::size_t i = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(interior));
    if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) chosen.push_back(i);
  }
  std::vector<double> out;
  for (auto i : chosen) out.push_back(pts[i]);
  return out;
}

struct NormalityRow {
  double t = 0.0;
  TestReport ks;
  TestReport jb;
  bool pass() const { return ks.p_value > 0.05 && jb.p_value > 0.05; }
};

inline std::vector<NormalityRow> normality_table(const PathEnsemble& ens, std::span<const double> points,
                                                 const std::function<double(double)>& variance) {
  std::vector<NormalityRow> rows;
  std::vector<double> column(ens.count);
  for (double t : points) {
    const auto i = ens.index_of(t);
    for (std::size_t r = 0; r < ens.count; ++r) column[r] = ens.at(r, i);
    rows.push_back({t, ks_normal(column, 0.0, std::sqrt(variance(t))), jarque_bera(column)});
  }
  return rows;
}

inline int cmd_normality(const ExperimentConfig& cfg, const std::string& paths_file, const std::string& table_file,
                         std::ostream& out = std::cout) {
  const auto seq = build_partition(cfg);
  const auto ens = io::read_paths(paths_file);
  detail::require_grid(ens, seq);
  if (ens.count < 100) throw ConfigError("normality needs at least 100 paths");
  auto points = cfg.analysis.test_points;
  if (points.empty()) points = random_test_points(seq, cfg.analysis.test_point_count, cfg.run.seed);
  const auto rows =
      normality_table(ens, points, [&](double t) { return detail::marginal_variance(cfg, t); });
  auto f = io::open_out(table_file);
  f << "t,ks_statistic,ks_p,jb_statistic,jb_p,pass\n";
  int passed = 0;
  for (const auto& r : rows) {
    passed += r.pass();
    f << io::format_double(r.t) << ',' << io::format_double(r.ks.statistic) << ',' << io::format_double(r.ks.p_value)
      << ',' << io::format_double(r.jb.statistic) << ',' << io::format_double(r.jb.p_value) << ','
      << (r.pass() ? 1 : 0) << '\n';
  }
  out << "passed=" << passed << '/' << rows.size() << '\n';
  return ok;
}

/// cov.bin, factor.bin and cov.json for the configured partition and H.
inline int cmd_covariance(const ExperimentConfig& cfg, const std::string& out_dir, const Options& opt,
                          std::ostream& out = std::cout) {
  if (!cfg.model.H) throw ConfigError("model.H is required for covariance");
  const auto seq = build_partition(cfg);
  detail::check_covariance_size(cfg, seq);
  const SchauderBasis basis(seq, seq.depth() - 1);
  const auto cov = assemble_covariance(basis, *cfg.model.H, {}, cfg.model.include_endpoint, opt.threads);
  const auto dir = detail::prepare_dir(out_dir);
  io::dump_matrix(cov.matrix, (dir / "cov.bin").string());
  io::dump_matrix(cov.factor, (dir / "factor.bin").string());
  auto side = io::covariance_sidecar(cov, seq.depth() - 1);
  side["config_hash_fnv1a"] = detail::base_manifest(cfg, "covariance")["config_hash_fnv1a"];
  side["tool_version"] = std::string(version);
  detail::write_json(dir / "cov.json", side);
  out << "dimension=" << cov.dim() << " jitter=" << io::format_double(cov.relative_jitter) << '\n';
  return ok;
}

inline nlohmann::json diagnostics_json(const PartitionDiagnostics& d) {
  return {{"M_hat", d.M_hat},
          {"c_hat", d.c_hat},
          {"a_hat", d.a_hat},
          {"b_hat", d.b_hat},
          {"coarse_to_fine_hat", d.coarse_to_fine_hat},
          {"balance_per_level", d.balance_per_level},
          {"mesh_ratio_per_level", d.mesh_ratio_per_level},
          {"every_parent_refined", d.every_parent_refined},
          {"mesh_strictly_decreasing", d.mesh_strictly_decreasing},
          {"mesh_bound_holds", d.mesh_bound_holds},
          {"is_finitely_refining", d.is_finitely_refining},
          {"is_complete_refining", d.is_complete_refining()}};
}

inline int cmd_validate_partition(const ExperimentConfig& cfg, const std::string& save_file,
                                  std::ostream& out = std::cout) {
  const auto seq = build_partition(cfg);
  const auto diag = validate(seq);
  auto j = diagnostics_json(diag);
  j["kind"] = std::string(to_string(seq.kind()));
  j["depth"] = seq.depth();
  j["T"] = seq.horizon();
  out << j.dump(2) << '\n';
  if (!save_file.empty()) io::save_partition(seq, save_file);
  return ok;
}

}  // namespace rough::cli
