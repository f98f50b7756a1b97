#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rough/fbm_model.hpp"
#include "rough/partition.hpp"
#include "rough/sampler.hpp"
#include "rough/schauder.hpp"

namespace rough::io {

/// 17 significant digits, '.' decimal, locale independent.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

// ---------------------------------------------------------------------------
// partitions: {"T": ..., "kind": ..., "levels": [[...], ...]}

inline nlohmann::json partition_to_json(const PartitionSequence& seq) {
  nlohmann::json j;
  j["T"] = seq.horizon();
  j["kind"] = std::string(to_string(seq.kind()));
  if (seq.ratio()) j["ratio"] = *seq.ratio();
  auto& levels = j["levels"] = nlohmann::json::array();
  for (const auto& lvl : seq.levels()) levels.push_back(std::vector<double>(lvl.points().begin(), lvl.points().end()));
  return j;
}

/// Loads levels verbatim; the kind tag is kept only for generator-built kinds
/// whose points reproduce exactly.
inline PartitionSequence partition_from_json(const nlohmann::json& j) {
  const double T = j.at("T").get<double>();
  auto levels = j.at("levels").get<std::vector<std::vector<double>>>();
  auto seq = PartitionSequence::custom(T, levels);
  const std::string kind = j.value("kind", std::string("custom"));
  const int depth = seq.depth();
  if (kind == "dyadic") {
    auto built = PartitionSequence::dyadic(T, depth);
    if (built == seq) return built;
  } else if (kind == "shifted-binary" && j.contains("ratio")) {
    auto built = PartitionSequence::shifted_binary(T, depth, j.at("ratio").get<double>());
    if (built == seq) return built;
  }
  return seq;
}

inline void save_partition(const PartitionSequence& seq, const std::string& path) {
  auto out = open_out(path);
  out << partition_to_json(seq).dump() << '\n';
}

inline PartitionSequence load_partition(const std::string& path) {
  auto in = open_in(path);
  return partition_from_json(nlohmann::json::parse(in));
}

// ---------------------------------------------------------------------------
// coefficient fields: "endpoints,<x0>,<xT>" then "m,k,theta" rows

inline void write_coefficients(std::ostream& out, const CoefficientField& field) {
  out << "endpoints," << format_double(field.x0()) << ',' << format_double(field.xT()) << '\n';
  out << "m,k,theta\n";
  for (int m = 0; m < field.levels(); ++m) {
    const auto lvl = field.level(m);
    for (std::size_t k = 0; k < lvl.size(); ++k) out << m << ',' << k << ',' << format_double(lvl[k]) << '\n';
  }
}

inline CoefficientField read_coefficients(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty coefficient file");
  auto head = split(line);
  if (head.size() != 3 || head[0] != "endpoints") throw std::invalid_argument("missing endpoints header");
  const double x0 = parse_double(head[1]);
  const double xT = parse_double(head[2]);
  if (!std::getline(in, line) || line.rfind("m,k,theta", 0) != 0) throw std::invalid_argument("missing column header");
  std::vector<std::size_t> sizes;
  std::vector<double> theta;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cols = split(line);
    if (cols.size() != 3) throw std::invalid_argument("bad coefficient row: " + line);
    const auto m = static_cast<std::size_t>(parse_double(cols[0]));
    const auto k = static_cast<std::size_t>(parse_double(cols[1]));
    if (m == sizes.size()) sizes.push_back(0);
    if (m + 1 != sizes.size() || k != sizes[m]) throw std::invalid_argument("coefficient rows out of order: " + line);
    ++sizes[m];
    theta.push_back(parse_double(cols[2]));
  }
  return CoefficientField(sizes, theta, x0, xT);
}

// ---------------------------------------------------------------------------
// paths: first row grid times, one row per path

inline void write_row(std::ostream& out, std::span<const double> row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << format_double(row[i]);
  }
  out << '\n';
}

inline std::vector<double> read_row(const std::string& line) {
  std::vector<double> row;
  for (auto cell : split(line)) row.push_back(parse_double(cell));
  return row;
}

inline PathEnsemble read_paths(std::istream& in) {
  PathEnsemble ens;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty paths file");
  ens.grid = read_row(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto row = read_row(line);
    if (row.size() != ens.grid.size()) throw std::invalid_argument("path row length differs from the grid");
    ens.values.insert(ens.values.end(), row.begin(), row.end());
    ++ens.count;
  }
  return ens;
}

inline PathEnsemble read_paths(const std::string& path) {
  auto in = open_in(path);
  return read_paths(in);
}

// ---------------------------------------------------------------------------
// covariance dumps: raw little-endian row-major doubles plus a JSON sidecar

inline void dump_matrix(const Eigen::MatrixXd& m, const std::string& path) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(sizeof(double) * rm.size()));
}

inline Eigen::MatrixXd load_matrix(const std::string& path, Eigen::Index dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(dim, dim);
  in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(sizeof(double) * rm.size()));
  if (!in) throw std::runtime_error("short matrix file '" + path + "'");
  return rm;
}

inline nlohmann::json covariance_sidecar(const CoeffCovariance& cov, int max_level) {
  return {{"dimension", cov.dim()},
          {"H", cov.H},
          {"max_level", max_level},
          {"include_endpoint", cov.include_endpoint},
          {"relative_jitter", cov.relative_jitter},
          {"absolute_jitter", cov.absolute_jitter},
          {"layout", "row-major float64, native byte order"}};
}

inline nlohmann::json manifest_to_json(const EnsembleManifest& m) {
  return {{"seed", m.seed},
          {"generator_version", m.generator_version},
          {"seeding", m.seeding},
          {"relative_jitter", m.relative_jitter},
          {"absolute_jitter", m.absolute_jitter},
          {"copula_jitter", m.copula_jitter},
          {"pearson_fallbacks", m.pearson_fallbacks},
          {"warnings", m.warnings}};
}

}  // namespace rough::io
