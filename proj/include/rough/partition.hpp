#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rough/errors.hpp"

namespace rough {

enum class PartitionKind { dyadic, shifted_binary, custom };

inline std::string_view to_string(PartitionKind kind) {
  switch (kind) {
    case PartitionKind::dyadic:
      return "dyadic";
    case PartitionKind::shifted_binary:
      return "shifted-binary";
    case PartitionKind::custom:
      return "custom";
  }
  return "custom";
}

inline PartitionKind partition_kind_from_string(std::string_view name) {
  if (name == "dyadic") return PartitionKind::dyadic;
  if (name == "shifted-binary") return PartitionKind::shifted_binary;
  if (name == "custom") return PartitionKind::custom;
  throw std::invalid_argument("unknown partition kind '" + std::string(name) + "'");
}

/// One level of a partition: 0 = t_0 < t_1 < ... < t_N = T.
class PartitionLevel {
 public:
  PartitionLevel() = default;

  PartitionLevel(std::vector<double> points, double horizon) : points_(std::move(points)) {
    if (points_.size() < 2) throw std::invalid_argument("partition level needs at least 2 points");
    if (points_.front() != 0.0 || points_.back() != horizon)
      throw std::invalid_argument("partition level must start at 0 and end at T");
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (!(points_[i] > points_[i - 1]))
        throw std::invalid_argument("partition level points must be strictly increasing");
    }
  }

  std::span<const double> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  /// N(pi^n), the number of intervals.
  std::size_t interval_count() const { return points_.size() - 1; }
  double operator[](std::size_t i) const { return points_[i]; }

  /// Largest gap |pi^n|.
  double mesh() const {
    double widest = 0.0;
    for (std::size_t i = 1; i < points_.size(); ++i) widest = std::max(widest, points_[i] - points_[i - 1]);
    return widest;
  }

  /// Smallest gap.
  double min_gap() const {
    double narrowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < points_.size(); ++i)
      narrowest = std::min(narrowest, points_[i] - points_[i - 1]);
    return narrowest;
  }

  /// True when every gap equals the mesh up to a relative tolerance.
  bool is_uniform(double rel_tol = 1e-12) const { return mesh() - min_gap() <= rel_tol * mesh(); }

  bool operator==(const PartitionLevel&) const = default;

 private:
  std::vector<double> points_;
};

/// Refining sequence pi^0 = {0, T} subset pi^1 subset ... subset pi^depth.
///
/// Points of a coarser level are copied verbatim into the next level, so
/// nestedness holds bit-exactly for the built-in generators.
class PartitionSequence {
 public:
  PartitionSequence() = default;

  static PartitionSequence dyadic(double horizon, int depth) {
    auto seq = split_recursively(horizon, depth, 2.0);
    seq.kind_ = PartitionKind::dyadic;
    return seq;
  }

  /// Each interval [a, b] gains the point a + (b - a) / ratio.
  static PartitionSequence shifted_binary(double horizon, int depth, double ratio) {
    if (!(ratio > 1.0)) throw std::invalid_argument("shifted-binary ratio must be > 1");
    auto seq = split_recursively(horizon, depth, ratio);
    seq.kind_ = PartitionKind::shifted_binary;
    seq.ratio_ = ratio;
    return seq;
  }

  /// Per-level shape is checked here; nestedness is checked by validate().
  static PartitionSequence custom(double horizon, std::vector<std::vector<double>> levels) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon T must be positive");
    if (levels.size() < 2) throw std::invalid_argument("a partition sequence needs at least levels 0 and 1");
    PartitionSequence seq;
    seq.horizon_ = horizon;
    seq.kind_ = PartitionKind::custom;
    for (auto& pts : levels) seq.levels_.emplace_back(std::move(pts), horizon);
    if (seq.levels_.front().size() != 2) throw std::invalid_argument("level 0 must be {0, T}");
    return seq;
  }

  double horizon() const { return horizon_; }
  PartitionKind kind() const { return kind_; }
  std::optional<double> ratio() const { return ratio_; }
  /// Index of the finest stored level.
  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  const PartitionLevel& level(int n) const {
    if (n < 0 || n > depth()) throw std::invalid_argument("partition level " + std::to_string(n) + " not stored");
    return levels_[static_cast<std::size_t>(n)];
  }
  const std::vector<PartitionLevel>& levels() const { return levels_; }

  bool operator==(const PartitionSequence& other) const {
    return horizon_ == other.horizon_ && levels_ == other.levels_;
  }

 private:
  static PartitionSequence split_recursively(double horizon, int depth, double ratio) {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon T must be positive");
    PartitionSequence seq;
    seq.horizon_ = horizon;
    std::vector<double> current{0.0, horizon};
    seq.levels_.emplace_back(current, horizon);
    for (int n = 0; n < depth; ++n) {
      std::vector<double> next;
      next.reserve(2 * current.size() - 1);
      for (std::size_t k = 0; k + 1 < current.size(); ++k) {
        next.push_back(current[k]);
        next.push_back(current[k] + (current[k + 1] - current[k]) / ratio);
      }
      next.push_back(current.back());
      seq.levels_.emplace_back(next, horizon);
      current = std::move(next);
    }
    return seq;
  }

  double horizon_ = 1.0;
  PartitionKind kind_ = PartitionKind::custom;
  std::optional<double> ratio_;
  std::vector<PartitionLevel> levels_;
};

/// p(n, k): index in pi^{n+1} of the k-th point of pi^n, for n = 0..depth-1.
class RefinementMap {
 public:
  explicit RefinementMap(const PartitionSequence& seq) {
    for (int n = 0; n < seq.depth(); ++n) {
      const auto coarse = seq.level(n).points();
      const auto fine = seq.level(n + 1).points();
      std::vector<std::size_t> map(coarse.size());
      std::size_t j = 0;
      for (std::size_t k = 0; k < coarse.size(); ++k) {
        while (j < fine.size() && fine[j] < coarse[k]) ++j;
        if (j == fine.size() || fine[j] != coarse[k]) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "partition not nested: point " << coarse[k] << " (index " << k << ") of level " << n
              << " is missing from level " << n + 1;
          throw StructuralError(msg.str());
        }
        map[k] = j;
      }
      maps_.push_back(std::move(map));
    }
  }

  std::span<const std::size_t> level(int n) const { return maps_.at(static_cast<std::size_t>(n)); }
  std::size_t operator()(int n, std::size_t k) const { return maps_.at(static_cast<std::size_t>(n)).at(k); }
  int levels() const { return static_cast<int>(maps_.size()); }

 private:
  std::vector<std::vector<std::size_t>> maps_;
};

/// Empirical constants from an exhaustive scan of the stored levels.
struct PartitionDiagnostics {
  std::size_t M_hat = 0;  ///< max number of child intervals per parent interval
  double c_hat = 1.0;     ///< max_n |pi^n| / smallest gap of pi^n
  double a_hat = 0.0;     ///< min_n |pi^n|/|pi^{n+1}| - 1
  double b_hat = 1.0;     ///< max_n |pi^n|/|pi^{n+1}|
  /// max_n |pi^n| / smallest gap of pi^{n+1}; bounded by c*M for balanced sequences.
  double coarse_to_fine_hat = 1.0;
  std::vector<double> balance_per_level;     ///< |pi^n| / smallest gap, n = 0..depth
  std::vector<double> mesh_ratio_per_level;  ///< |pi^n| / |pi^{n+1}|, n = 0..depth-1

  bool every_parent_refined = false;  ///< each parent interval gains >= 1 new point
  bool mesh_strictly_decreasing = false;
  bool mesh_bound_holds = false;  ///< |pi^n| <= c_hat * T / N(pi^n) at every level
  bool is_finitely_refining = false;

  bool is_balanced(double c_bound = std::numeric_limits<double>::infinity()) const { return c_hat <= c_bound; }

  bool is_complete_refining(double a_bound = 0.0,
                            double b_bound = std::numeric_limits<double>::infinity()) const {
    return a_hat > 0.0 && a_hat >= a_bound && b_hat <= b_bound;
  }
};

inline PartitionDiagnostics validate(const PartitionSequence& seq) {
  const RefinementMap refinement(seq);  // throws StructuralError when not nested
  PartitionDiagnostics diag;
  diag.every_parent_refined = true;
  diag.mesh_strictly_decreasing = true;
  diag.mesh_bound_holds = true;
  diag.a_hat = std::numeric_limits<double>::infinity();
  diag.b_hat = 0.0;
  diag.c_hat = 0.0;
  diag.coarse_to_fine_hat = 0.0;

  const double T = seq.horizon();
  for (int n = 0; n <= seq.depth(); ++n) {
    const auto& lvl = seq.level(n);
    const double balance = lvl.mesh() / lvl.min_gap();
    diag.balance_per_level.push_back(balance);
    diag.c_hat = std::max(diag.c_hat, balance);
  }
  for (int n = 0; n <= seq.depth(); ++n) {
    const auto& lvl = seq.level(n);
    if (lvl.mesh() > diag.c_hat * T / static_cast<double>(lvl.interval_count()) * (1.0 + 1e-12))
      diag.mesh_bound_holds = false;
  }
  for (int n = 0; n < seq.depth(); ++n) {
    const auto map = refinement.level(n);
    for (std::size_t k = 0; k + 1 < map.size(); ++k) {
      const std::size_t children = map[k + 1] - map[k];
      diag.M_hat = std::max(diag.M_hat, children);
      if (children < 2) diag.every_parent_refined = false;
    }
    const double coarse = seq.level(n).mesh();
    const double fine = seq.level(n + 1).mesh();
    const double ratio = coarse / fine;
    diag.mesh_ratio_per_level.push_back(ratio);
    diag.a_hat = std::min(diag.a_hat, ratio - 1.0);
    diag.b_hat = std::max(diag.b_hat, ratio);
    if (!(fine < coarse)) diag.mesh_strictly_decreasing = false;
    diag.coarse_to_fine_hat = std::max(diag.coarse_to_fine_hat, coarse / seq.level(n + 1).min_gap());
  }
  diag.is_finitely_refining = diag.every_parent_refined && diag.mesh_strictly_decreasing;
  return diag;
}

}  // namespace rough
