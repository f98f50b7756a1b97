#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rough/partition.hpp"

namespace rough {

struct BasisIndex {
  int m = 0;
  std::size_t k = 0;
  bool operator==(const BasisIndex&) const = default;
};

/// Support (t1, t2, t3) of one Haar/Schauder pair; t2 is the new point.
struct SupportTriple {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;

  double d1() const { return t2 - t1; }
  double d2() const { return t3 - t2; }

  /// Value of the Haar function on [t1, t2).
  double haar_up() const { return std::sqrt(d2() / (d1() * (d1() + d2()))); }
  /// Magnitude of the Haar function on [t2, t3).
  double haar_down() const { return std::sqrt(d1() / (d2() * (d1() + d2()))); }
  /// e(t2).
  double peak() const { return std::sqrt(d1() * d2() / (d1() + d2())); }

  double haar(double t) const {
    if (t >= t1 && t < t2) return haar_up();
    if (t >= t2 && t < t3) return -haar_down();
    return 0.0;
  }

  double schauder(double t) const {
    if (t <= t1 || t >= t3) return 0.0;
    if (t <= t2) return haar_up() * (t - t1);
    return haar_down() * (t3 - t);
  }

  bool operator==(const SupportTriple&) const = default;
};

/// Schauder coefficient of x from the three samples at the support points.
inline double schauder_coefficient(const SupportTriple& s, double x1, double x2, double x3) {
  const double d1 = s.d1();
  const double d2 = s.d2();
  return ((x2 - x1) * d2 - (x3 - x2) * d1) / std::sqrt(d1 * d2 * (d1 + d2));
}

/// Generalized Schauder system of levels m = 0..levels()-1 bound to a partition.
///
/// Within one parent interval [t_p, t_q] of pi^m with children
/// t_p < t_{p+1} < ... < t_q in pi^{m+1}, the new point t_j has support
/// (t_p, t_j, t_{j+1}). Indices k run over new points in increasing t2.
class SchauderBasis {
 public:
  SchauderBasis() = default;

  SchauderBasis(const PartitionSequence& seq, int max_level) : horizon_(seq.horizon()) {
    if (max_level < 0 || max_level + 1 > seq.depth())
      throw std::invalid_argument("maxLevel " + std::to_string(max_level) + " needs partition level " +
                                  std::to_string(max_level + 1) + " but depth is " + std::to_string(seq.depth()));
    const int L = max_level + 1;
    const RefinementMap refinement(seq);

    // position of every level-n point inside the finest grid
    std::vector<std::vector<std::size_t>> to_fine(static_cast<std::size_t>(L) + 1);
    to_fine[L].resize(seq.level(L).size());
    for (std::size_t i = 0; i < to_fine[L].size(); ++i) to_fine[L][i] = i;
    for (int n = L - 1; n >= 0; --n) {
      const auto map = refinement.level(n);
      auto& pos = to_fine[static_cast<std::size_t>(n)];
      pos.resize(map.size());
      for (std::size_t k = 0; k < map.size(); ++k) pos[k] = to_fine[static_cast<std::size_t>(n) + 1][map[k]];
    }

    const auto fine = seq.level(L).points();
    grid_.assign(fine.begin(), fine.end());
    offsets_.push_back(0);
    for (int m = 0; m < L; ++m) {
      const auto map = refinement.level(m);
      const auto child = seq.level(m + 1).points();
      const auto& pos = to_fine[static_cast<std::size_t>(m) + 1];
      mesh_.push_back(seq.level(m + 1).mesh());
      for (std::size_t k = 0; k + 1 < map.size(); ++k) {
        const std::size_t p = map[k];
        const std::size_t q = map[k + 1];
        for (std::size_t j = p + 1; j < q; ++j) {
          supports_.push_back({child[p], child[j], child[j + 1]});
          local_.push_back({p, j, j + 1});
          fine_.push_back({pos[p], pos[j], pos[j + 1]});
        }
      }
      offsets_.push_back(supports_.size());
    }
  }

  int levels() const { return static_cast<int>(offsets_.size()) - 1; }
  int max_level() const { return levels() - 1; }
  double horizon() const { return horizon_; }
  std::size_t size() const { return supports_.size(); }
  /// |I_m|.
  std::size_t level_size(int m) const { return offsets_.at(static_cast<std::size_t>(m) + 1) - offsets_[m]; }
  std::size_t offset(int m) const { return offsets_.at(static_cast<std::size_t>(m)); }
  /// |pi^{m+1}|.
  double mesh(int m) const { return mesh_.at(static_cast<std::size_t>(m)); }
  /// Points of pi^{levels()}, where decompose samples and reconstruct evaluates.
  std::span<const double> grid() const { return grid_; }

  std::size_t flat(BasisIndex idx) const {
    check(idx);
    return offsets_[static_cast<std::size_t>(idx.m)] + idx.k;
  }

  BasisIndex index(std::size_t flat_index) const {
    if (flat_index >= size()) throw std::invalid_argument("flat basis index out of range");
    int m = 0;
    while (offsets_[static_cast<std::size_t>(m) + 1] <= flat_index) ++m;
    return {m, flat_index - offsets_[static_cast<std::size_t>(m)]};
  }

  const SupportTriple& support(BasisIndex idx) const { return supports_[flat(idx)]; }
  const SupportTriple& support(std::size_t flat_index) const { return supports_.at(flat_index); }
  std::span<const SupportTriple> supports() const { return supports_; }
  std::span<const SupportTriple> level_supports(int m) const {
    return std::span<const SupportTriple>(supports_).subspan(offset(m), level_size(m));
  }

  /// Indices of (t1, t2, t3) in the finest grid.
  const std::array<std::size_t, 3>& fine_positions(std::size_t flat_index) const { return fine_.at(flat_index); }
  /// Indices of (t1, t2, t3) in the grid of pi^{m+1}.
  const std::array<std::size_t, 3>& local_positions(std::size_t flat_index) const { return local_.at(flat_index); }

 private:
  void check(BasisIndex idx) const {
    if (idx.m < 0 || idx.m >= levels() || idx.k >= level_size(idx.m))
      throw std::invalid_argument("basis index (" + std::to_string(idx.m) + ", " + std::to_string(idx.k) +
                                  ") out of range");
  }

  double horizon_ = 1.0;
  std::vector<double> grid_;
  std::vector<double> mesh_;
  std::vector<std::size_t> offsets_;
  std::vector<SupportTriple> supports_;
  std::vector<std::array<std::size_t, 3>> local_;
  std::vector<std::array<std::size_t, 3>> fine_;
};

inline SchauderBasis enumerate_supports(const PartitionSequence& seq, int max_level) {
  return SchauderBasis(seq, max_level);
}

inline void check_time(const SchauderBasis& basis, double t) {
  if (!(t >= 0.0 && t <= basis.horizon())) throw std::invalid_argument("time outside [0, T]");
}

inline double eval_schauder(const SchauderBasis& basis, BasisIndex idx, double t) {
  check_time(basis, t);
  return basis.support(idx).schauder(t);
}

inline double eval_haar(const SchauderBasis& basis, BasisIndex idx, double t) {
  check_time(basis, t);
  return basis.support(idx).haar(t);
}

/// Ragged theta[m][k] stored flat in level-major order, plus x(0) and x(T).
class CoefficientField {
 public:
  CoefficientField() = default;

  explicit CoefficientField(const SchauderBasis& basis) : theta_(basis.size(), 0.0) {
    for (int m = 0; m <= basis.levels(); ++m) offsets_.push_back(basis.offset(m));
  }

  CoefficientField(std::vector<std::size_t> level_sizes, std::vector<double> theta, double x0 = 0.0,
                   double xT = 0.0)
      : theta_(std::move(theta)), x0_(x0), xT_(xT) {
    offsets_.push_back(0);
    for (auto n : level_sizes) offsets_.push_back(offsets_.back() + n);
    if (offsets_.back() != theta_.size()) throw std::invalid_argument("coefficient count does not match level sizes");
  }

  int levels() const { return offsets_.empty() ? 0 : static_cast<int>(offsets_.size()) - 1; }
  std::size_t size() const { return theta_.size(); }
  std::size_t level_size(int m) const { return offsets_.at(static_cast<std::size_t>(m) + 1) - offsets_[m]; }

  std::span<double> level(int m) { return std::span<double>(theta_).subspan(offsets_.at(m), level_size(m)); }
  std::span<const double> level(int m) const {
    return std::span<const double>(theta_).subspan(offsets_.at(m), level_size(m));
  }
  double& operator()(int m, std::size_t k) { return theta_[offsets_.at(m) + k]; }
  double operator()(int m, std::size_t k) const { return theta_[offsets_.at(m) + k]; }

  std::span<double> flat() { return theta_; }
  std::span<const double> flat() const { return theta_; }

  double x0() const { return x0_; }
  double xT() const { return xT_; }
  void set_endpoints(double x0, double xT) {
    x0_ = x0;
    xT_ = xT;
  }

  /// Same ragged shape as the basis.
  bool matches(const SchauderBasis& basis) const {
    if (levels() != basis.levels()) return false;
    for (int m = 0; m < levels(); ++m)
      if (level_size(m) != basis.level_size(m)) return false;
    return true;
  }

  bool operator==(const CoefficientField&) const = default;

 private:
  std::vector<double> theta_;
  std::vector<std::size_t> offsets_;
  double x0_ = 0.0;
  double xT_ = 0.0;
};

inline void require_shape(const CoefficientField& coeffs, const SchauderBasis& basis) {
  if (!coeffs.matches(basis)) throw std::invalid_argument("coefficient field shape does not match basis");
}

/// Coefficients of a path sampled on basis.grid().
inline CoefficientField decompose(std::span<const double> samples, const SchauderBasis& basis) {
  if (samples.size() != basis.grid().size())
    throw std::invalid_argument("expected " + std::to_string(basis.grid().size()) + " samples, got " +
                                std::to_string(samples.size()));
  CoefficientField out(basis);
  auto theta = out.flat();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& pos = basis.fine_positions(i);
    theta[i] = schauder_coefficient(basis.support(i), samples[pos[0]], samples[pos[1]], samples[pos[2]]);
  }
  out.set_endpoints(samples.front(), samples.back());
  return out;
}

/// Truncated series on basis.grid(), computed level by level in O(M * size).
inline void reconstruct_on_grid(const CoefficientField& coeffs, const SchauderBasis& basis, std::span<double> out,
                                std::vector<double>& scratch) {
  require_shape(coeffs, basis);
  if (out.size() != basis.grid().size()) throw std::invalid_argument("output length does not match grid");
  const double T = basis.horizon();

  // values on the current level, indexed by that level's points
  std::vector<double>& cur = scratch;
  std::vector<double> times{0.0, T};
  cur.assign({coeffs.x0(), coeffs.xT()});
  std::vector<double> next;
  std::vector<double> next_times;
  const auto theta = coeffs.flat();
  for (int m = 0; m < basis.levels(); ++m) {
    const std::size_t begin = basis.offset(m);
    const std::size_t end = begin + basis.level_size(m);
    // child grid size = parent points + new points
    const std::size_t n_child = times.size() + (end - begin);
    next.assign(n_child, 0.0);
    next_times.assign(n_child, 0.0);
    // place parent points and interpolate new points
    std::size_t i = begin;
    std::size_t parent = 0;
    for (std::size_t j = 0; j < n_child;) {
      next_times[j] = times[parent];
      next[j] = cur[parent];
      ++j;
      if (parent + 1 == times.size()) break;
      const double a = times[parent];
      const double b = times[parent + 1];
      const double va = cur[parent];
      const double vb = cur[parent + 1];
      while (i < end && basis.support(i).t2 < b) {
        const double t = basis.support(i).t2;
        next_times[j] = t;
        next[j] = va + (vb - va) * ((t - a) / (b - a));
        ++j;
        ++i;
      }
      ++parent;
    }
    for (std::size_t f = begin; f < end; ++f) {
      const double th = theta[f];
      if (th == 0.0) continue;
      const auto& s = basis.support(f);
      const auto& pos = basis.local_positions(f);
      const double up = s.haar_up();
      for (std::size_t j = pos[0] + 1; j <= pos[1]; ++j) next[j] += th * up * (next_times[j] - s.t1);
    }
    cur.swap(next);
    times.swap(next_times);
  }
  std::copy(cur.begin(), cur.end(), out.begin());
}

inline std::vector<double> reconstruct_on_grid(const CoefficientField& coeffs, const SchauderBasis& basis) {
  std::vector<double> out(basis.grid().size());
  std::vector<double> scratch;
  reconstruct_on_grid(coeffs, basis, out, scratch);
  return out;
}

/// Truncated series at arbitrary times in [0, T].
///
/// The series is piecewise linear between points of basis.grid(), so values
/// are interpolated exactly from the grid reconstruction.
inline std::vector<double> reconstruct(const CoefficientField& coeffs, const SchauderBasis& basis,
                                       std::span<const double> times) {
  const auto values = reconstruct_on_grid(coeffs, basis);
  const auto grid = basis.grid();
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    check_time(basis, t);
    auto it = std::lower_bound(grid.begin(), grid.end(), t);
    const auto j = static_cast<std::size_t>(it - grid.begin());
    if (grid[j] == t) {
      out.push_back(values[j]);
      continue;
    }
    const double a = grid[j - 1];
    const double b = grid[j];
    out.push_back(values[j - 1] + (values[j] - values[j - 1]) * ((t - a) / (b - a)));
  }
  return out;
}

/// Direct evaluation of x0 + (xT - x0) t/T + sum theta e(t); O(size) per time.
inline double evaluate_series(const CoefficientField& coeffs, const SchauderBasis& basis, double t) {
  require_shape(coeffs, basis);
  check_time(basis, t);
  double v = coeffs.x0() + (coeffs.xT() - coeffs.x0()) * (t / basis.horizon());
  const auto theta = coeffs.flat();
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (theta[i] != 0.0) v += theta[i] * basis.support(i).schauder(t);
  return v;
}

/// |theta_{m,k}| <= C |pi^{m+1}|^{eps - 1/2} for every stored coefficient.
inline bool check_continuity_condition(const CoefficientField& coeffs, const SchauderBasis& basis, double eps,
                                       double C) {
  require_shape(coeffs, basis);
  for (int m = 0; m < basis.levels(); ++m) {
    const double bound = C * std::pow(basis.mesh(m), eps - 0.5);
    for (double th : coeffs.level(m))
      if (std::abs(th) > bound) return false;
  }
  return true;
}

}  // namespace rough
