#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rough/errors.hpp"
#include "rough/partition.hpp"
#include "rough/schauder.hpp"

namespace rough {

/// Indices of every level's points inside the finest stored level.
class LevelPositions {
 public:
  explicit LevelPositions(const PartitionSequence& seq) : pos_(static_cast<std::size_t>(seq.depth()) + 1) {
    const RefinementMap refinement(seq);
    const auto N = static_cast<std::size_t>(seq.depth());
    pos_[N].resize(seq.level(seq.depth()).size());
    for (std::size_t i = 0; i < pos_[N].size(); ++i) pos_[N][i] = i;
    for (int n = seq.depth() - 1; n >= 0; --n) {
      const auto map = refinement.level(n);
      auto& out = pos_[static_cast<std::size_t>(n)];
      out.resize(map.size());
      for (std::size_t k = 0; k < map.size(); ++k) out[k] = pos_[static_cast<std::size_t>(n) + 1][map[k]];
    }
  }

  std::span<const std::size_t> operator[](int n) const { return pos_.at(static_cast<std::size_t>(n)); }
  int depth() const { return static_cast<int>(pos_.size()) - 1; }

 private:
  std::vector<std::vector<std::size_t>> pos_;
};

namespace detail {

inline void require_finest(std::span<const double> samples, const PartitionSequence& seq) {
  if (samples.size() != seq.level(seq.depth()).size())
    throw std::invalid_argument("samples must cover the finest level (" +
                                std::to_string(seq.level(seq.depth()).size()) + " points), got " +
                                std::to_string(samples.size()));
}

inline double abs_pow(double x, double p) {
  const double a = std::abs(x);
  if (p == 2.0) return a * a;
  if (p == 1.0) return a;
  return a == 0.0 ? 0.0 : std::pow(a, p);
}

/// Least-squares slope of y against x.
inline double ls_slope(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Hölder regularity

/// max over grid pairs of |x(t) - x(s)| / |t - s|^alpha.
inline double holder_seminorm_grid(std::span<const double> samples, std::span<const double> grid, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (samples.size() != grid.size()) throw std::invalid_argument("samples and grid differ in length");
  if (grid.size() < 2) throw std::invalid_argument("need at least 2 grid points");
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const double r = std::abs(samples[j] - samples[i]) / std::pow(grid[j] - grid[i], alpha);
      best = std::max(best, r);
    }
  return best;
}

enum class HolderBranch { decaying, bounded, growing };

inline std::string_view to_string(HolderBranch b) {
  switch (b) {
    case HolderBranch::decaying:
      return "decaying";
    case HolderBranch::bounded:
      return "bounded";
    case HolderBranch::growing:
      return "growing";
  }
  return "bounded";
}

struct HolderTraceRow {
  int m = 0;
  double max_log_theta = 0.0;  ///< g_m, -inf for an all-zero level
  double log_mesh = 0.0;       ///< log |pi^{m+1}|
  double ratio = 0.0;          ///< g_m / log|pi^{m+1}| (NaN for an all-zero level)
};

struct HolderEstimate {
  double alpha_hat = 0.5;
  HolderBranch branch = HolderBranch::bounded;
  double slope = 0.0;       ///< least-squares slope of g_m per level over the window
  bool degenerate = false;  ///< fewer than two nonzero levels in the window
  bool clamped = false;     ///< raw estimate left [0, 1]
  int first_level = 0;
  int last_level = 0;
  std::vector<HolderTraceRow> trace;  ///< every stored level
};

struct HolderOptions {
  std::optional<int> first_level;  ///< window start; default: last `trailing` levels
  std::optional<int> last_level;   ///< window end (inclusive); default: last stored level
  int trailing = 6;
  double slope_tol = 0.05;
};

/// Classifies g_m = max_k log|theta_{m,k}| by its least-squares slope over the
/// window and returns 1/2 +- max over the window of |g_m / log|pi^{m+1}||.
inline HolderEstimate holder_exponent_estimate(const CoefficientField& coeffs, const PartitionSequence& seq,
                                               const HolderOptions& opt = {}) {
  const int L = coeffs.levels();
  if (L < 1) throw std::invalid_argument("empty coefficient field");
  if (L > seq.depth()) throw std::invalid_argument("coefficient field is deeper than the partition");
  HolderEstimate est;
  for (int m = 0; m < L; ++m) {
    HolderTraceRow row;
    row.m = m;
    double mx = 0.0;
    for (double th : coeffs.level(m)) mx = std::max(mx, std::abs(th));
    row.max_log_theta = mx > 0.0 ? std::log(mx) : -std::numeric_limits<double>::infinity();
    row.log_mesh = std::log(seq.level(m + 1).mesh());
    row.ratio = mx > 0.0 ? row.max_log_theta / row.log_mesh : std::numeric_limits<double>::quiet_NaN();
    est.trace.push_back(row);
  }
  est.last_level = std::min(opt.last_level.value_or(L - 1), L - 1);
  est.first_level = std::max(0, opt.first_level.value_or(est.last_level - opt.trailing + 1));
  if (est.first_level > est.last_level) throw std::invalid_argument("empty estimator window");

  std::vector<double> xs, gs, ratios;
  for (int m = est.first_level; m <= est.last_level; ++m) {
    const auto& row = est.trace[static_cast<std::size_t>(m)];
    if (!std::isfinite(row.max_log_theta)) continue;
    xs.push_back(m);
    gs.push_back(row.max_log_theta);
    ratios.push_back(row.ratio);
  }
  if (xs.size() < 2) {
    est.degenerate = true;
    est.branch = HolderBranch::decaying;
    est.alpha_hat = 1.0;
    est.clamped = true;
    return est;
  }
  est.slope = detail::ls_slope(xs, gs);
  double raw = 0.5;
  if (est.slope < -opt.slope_tol) {
    est.branch = HolderBranch::decaying;
    raw = 0.5 + *std::max_element(ratios.begin(), ratios.end());
  } else if (est.slope > opt.slope_tol) {
    est.branch = HolderBranch::growing;
    // g_m / (-log|pi^{m+1}|) = -ratio
    double r = -std::numeric_limits<double>::infinity();
    for (double q : ratios) r = std::max(r, -q);
    raw = 0.5 - r;
  } else {
    est.branch = HolderBranch::bounded;
  }
  est.alpha_hat = std::clamp(raw, 0.0, 1.0);
  est.clamped = est.alpha_hat != raw;
  return est;
}

struct HolderBounds {
  double lower = 0.0;
  double upper = 0.0;
  double S = 0.0;  ///< max |theta| |pi^{m+1}|^{1/2 - alpha}
};

/// Two-sided bound on the alpha-Hölder seminorm from the coefficients and the
/// empirical partition constants.
inline HolderBounds ciesielski_bounds(const CoefficientField& coeffs, const PartitionSequence& seq, double alpha,
                                      const PartitionDiagnostics& diag) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(diag.a_hat > 0.0)) throw NotCompleteRefining("a_hat <= 0: the sequence is not complete refining");
  if (coeffs.levels() > seq.depth()) throw std::invalid_argument("coefficient field is deeper than the partition");
  HolderBounds b;
  for (int m = 0; m < coeffs.levels(); ++m) {
    const double w = std::pow(seq.level(m + 1).mesh(), 0.5 - alpha);
    for (double th : coeffs.level(m)) b.S = std::max(b.S, std::abs(th) * w);
  }
  const double a = diag.a_hat;
  const double c = diag.c_hat;
  const auto M = static_cast<double>(diag.M_hat);
  const double K1 = 1.0 / (1.0 - std::pow(1.0 + a, alpha - 1.0));
  const double K2 = 1.0 / (1.0 - std::pow(1.0 + a, -alpha));
  b.lower = b.S / (2.0 * std::pow(c, 1.5));
  b.upper = b.S * (2.0 * M * std::sqrt(c) * K1 + 2.0 * M * K2);
  return b;
}

// ---------------------------------------------------------------------------
// p-th variation

/// sum over level-n points t_j <= t of |x(t_{j+1}) - x(t_j)|^p; samples on the finest level.
inline double pth_variation(std::span<const double> samples, const PartitionSequence& seq, const LevelPositions& pos,
                            int n, double p, double t) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  detail::require_finest(samples, seq);
  const auto pts = seq.level(n).points();
  const auto idx = pos[n];
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < pts.size() && pts[j] <= t; ++j)
    sum += detail::abs_pow(samples[idx[j + 1]] - samples[idx[j]], p);
  return sum;
}

inline double pth_variation(std::span<const double> samples, const PartitionSequence& seq, int n, double p, double t) {
  return pth_variation(samples, seq, LevelPositions(seq), n, p, t);
}

/// Cumulative p-th variation at every level-n point.
inline std::vector<double> variation_curve(std::span<const double> samples, const PartitionSequence& seq, int n,
                                           double p) {
  detail::require_finest(samples, seq);
  const LevelPositions pos(seq);
  const auto idx = pos[n];
  std::vector<double> curve{0.0};
  for (std::size_t j = 0; j + 1 < idx.size(); ++j)
    curve.push_back(curve.back() + detail::abs_pow(samples[idx[j + 1]] - samples[idx[j]], p));
  return curve;
}

/// Quadratic variation at dyadic level n from the coefficients:
/// T 2^{-n} [ (xT - x0)^2 / T + sum_{m<n} sum_k theta^2 1{k T / 2^m < t} ].
/// Exact at t = T; for t < T it is the coefficient-side surrogate.
inline double qv_from_coeffs_dyadic(const CoefficientField& coeffs, const PartitionSequence& seq, int n, double t) {
  if (seq.kind() != PartitionKind::dyadic) {
    // accept uniform binary sequences built any other way
    for (int l = 0; l <= seq.depth(); ++l)
      if (seq.level(l).interval_count() != (std::size_t{1} << l) || !seq.level(l).is_uniform())
        throw UnsupportedPartition("coefficient-side quadratic variation needs the dyadic sequence");
  }
  if (n < 0 || n > coeffs.levels()) throw std::invalid_argument("level n exceeds the coefficient field");
  const double T = seq.horizon();
  const double dx = coeffs.xT() - coeffs.x0();
  double sum = t > 0.0 ? dx * dx / T : 0.0;
  for (int m = 0; m < n; ++m) {
    const auto lvl = coeffs.level(m);
    const double width = std::ldexp(T, -m);
    for (std::size_t k = 0; k < lvl.size(); ++k)
      if (static_cast<double>(k) * width < t) sum += lvl[k] * lvl[k];
  }
  return std::ldexp(T, -n) * sum;
}

struct VariationResult {
  std::vector<int> levels;
  std::vector<double> p_values;
  std::vector<std::vector<double>> sums;  ///< sums[i][j]: total p_values[i]-variation at levels[j]
  std::vector<double> slopes;             ///< slope of log sum against level, per p
  std::optional<double> index_hat;        ///< empty when indeterminate
  bool indeterminate = false;
};

struct VariationOptions {
  double tolerance = 0.01;   ///< bisection tolerance in p
  double slope_eps = 1e-9;   ///< slopes below -slope_eps count as vanishing
};

/// Smallest p whose level sums trend to zero (negative log-sum slope).
inline VariationResult variation_index_estimate(std::span<const double> samples, const PartitionSequence& seq,
                                                std::vector<double> p_grid, std::vector<int> levels,
                                                const VariationOptions& opt = {}) {
  if (p_grid.empty()) throw std::invalid_argument("empty p grid");
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    if (!(p_grid[i] >= 1.0 && p_grid[i] <= 8.0)) throw std::invalid_argument("p grid must lie in [1, 8]");
    if (i > 0 && !(p_grid[i] > p_grid[i - 1])) throw std::invalid_argument("p grid must be increasing");
  }
  if (levels.size() < 3) throw std::invalid_argument("need at least 3 levels");
  detail::require_finest(samples, seq);
  const LevelPositions pos(seq);
  const double T = seq.horizon();

  VariationResult res;
  res.levels = levels;
  std::vector<double> xs(levels.begin(), levels.end());
  auto slope_at = [&](double p, std::vector<double>* keep) {
    std::vector<double> logs;
    for (int n : levels) {
      const double s = pth_variation(samples, seq, pos, n, p, T);
      if (keep) keep->push_back(s);
      logs.push_back(s > 0.0 ? std::log(s) : -745.0);
    }
    return detail::ls_slope(xs, logs);
  };
  auto vanishes = [&](double slope) { return slope < -opt.slope_eps; };

  std::optional<std::size_t> first;
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    std::vector<double> s;
    const double slope = slope_at(p_grid[i], &s);
    res.p_values.push_back(p_grid[i]);
    res.sums.push_back(std::move(s));
    res.slopes.push_back(slope);
    if (!first && vanishes(slope)) first = i;
  }
  if (!first) {
    res.indeterminate = true;
    return res;
  }
  if (*first == 0) {
    res.index_hat = p_grid.front();
    return res;
  }
  double lo = p_grid[*first - 1];
  double hi = p_grid[*first];
  while (hi - lo > opt.tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (vanishes(slope_at(mid, nullptr)))
      hi = mid;
    else
      lo = mid;
  }
  res.index_hat = 0.5 * (lo + hi);
  return res;
}

/// count^{2H-1} sum_{t_{i+1} <= t} |dx|^2 on a uniform level n, count = floor(t / |pi^n|).
inline double scaled_qv(std::span<const double> samples, const PartitionSequence& seq, const LevelPositions& pos,
                        double H, double t, int n) {
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("H must lie in (0, 1)");
  detail::require_finest(samples, seq);
  const auto& lvl = seq.level(n);
  if (!lvl.is_uniform()) throw UnsupportedPartition("scaled quadratic variation needs a uniform level");
  const auto pts = lvl.points();
  const auto idx = pos[n];
  const double count = std::floor(t / lvl.mesh() * (1.0 + 1e-12));
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < pts.size() && pts[j + 1] <= t; ++j) {
    const double d = samples[idx[j + 1]] - samples[idx[j]];
    sum += d * d;
  }
  if (count < 1.0) return 0.0;
  return std::pow(count, 2.0 * H - 1.0) * sum;
}

inline double scaled_qv(std::span<const double> samples, const PartitionSequence& seq, double H, double t, int n) {
  return scaled_qv(samples, seq, LevelPositions(seq), H, t, n);
}

}  // namespace rough
