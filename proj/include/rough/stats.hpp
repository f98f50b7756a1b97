#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rough/errors.hpp"
#include "rough/fbm_model.hpp"
#include "rough/partition.hpp"
#include "rough/roughness.hpp"
#include "rough/sampler.hpp"
#include "rough/special_functions.hpp"

namespace rough {

struct TestReport {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Central sample moments m2, m3, m4 (divisor n).
struct CentralMoments {
  double mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  double skewness() const { return m3 / std::pow(m2, 1.5); }
  double kurtosis() const { return m4 / (m2 * m2); }
};

inline CentralMoments central_moments(std::span<const double> x) {
  CentralMoments c;
  const auto n = static_cast<double>(x.size());
  for (double v : x) c.mean += v;
  c.mean /= n;
  for (double v : x) {
    const double d = v - c.mean;
    const double d2 = d * d;
    c.m2 += d2;
    c.m3 += d2 * d;
    c.m4 += d2 * d2;
  }
  c.m2 /= n;
  c.m3 /= n;
  c.m4 /= n;
  return c;
}

/// JB = n/6 (S^2 + (K - 3)^2 / 4); p from the chi-square(2) tail exp(-JB/2).
inline TestReport jarque_bera(std::span<const double> x) {
  if (x.size() < 20) throw std::invalid_argument("jarque_bera needs at least 20 samples");
  const CentralMoments c = central_moments(x);
  if (!(c.m2 > 0.0)) throw DegenerateSample("jarque_bera: zero sample variance");
  const double S = c.skewness();
  const double K = c.kurtosis();
  const auto n = static_cast<double>(x.size());
  const double jb = n / 6.0 * (S * S + 0.25 * (K - 3.0) * (K - 3.0));
  return {"jarque-bera", jb, std::clamp(std::exp(-0.5 * jb), 0.0, 1.0), x.size()};
}

/// One-sample Kolmogorov-Smirnov test against N(mu, sigma^2) with known parameters.
inline TestReport ks_normal(std::span<const double> x, double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("ks_normal: sigma must be positive");
  if (x.empty()) throw std::invalid_argument("ks_normal: empty sample");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  if (s.front() == s.back() && s.size() > 1) throw DegenerateSample("ks_normal: constant sample");
  const auto n = static_cast<double>(s.size());
  double D = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double F = normal_cdf((s[i] - mu) / sigma);
    D = std::max({D, (static_cast<double>(i) + 1.0) / n - F, F - static_cast<double>(i) / n});
  }
  const double rn = std::sqrt(n);
  const double lambda = D * (rn + 0.12 + 0.11 / rn);
  return {"kolmogorov-smirnov", D, kolmogorov_survival(lambda), s.size()};
}

/// Mean and jackknife standard error of per-replica values.
struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanEstimate jackknife_mean(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) throw std::invalid_argument("jackknife needs at least 2 values");
  double total = 0.0;
  for (double x : v) total += x;
  const double mean = total / static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) {
    const double loo = (total - x) / static_cast<double>(n - 1);
    ss += (loo - mean) * (loo - mean);
  }
  return {mean, std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss)};
}

using Kernel = std::function<double(double, double)>;

inline Kernel fbm_kernel_fn(double H) {
  return [H](double t, double s) { return fbm_kernel(t, s, H); };
}

/// Covariance of B^H(t) - t B^H(1), the process without the endpoint term.
inline Kernel fbm_bridge_kernel_fn(double H) {
  return [H](double t, double s) {
    return fbm_kernel(t, s, H) - t * fbm_kernel(1.0, s, H) - s * fbm_kernel(t, 1.0, H) + t * s;
  };
}

/// Gaussian joint moment E[prod X(t_j)] by Wick/Isserlis, up to order 4.
inline double wick_moment(std::span<const double> t, const Kernel& K) {
  switch (t.size()) {
    case 0:
      return 1.0;
    case 1:
    case 3:
      return 0.0;
    case 2:
      return K(t[0], t[1]);
    case 4:
      return K(t[0], t[1]) * K(t[2], t[3]) + K(t[0], t[2]) * K(t[1], t[3]) + K(t[0], t[3]) * K(t[1], t[2]);
    default:
      throw std::invalid_argument("reference moments are available up to order 4");
  }
}

struct MomentRow {
  std::vector<double> times;
  double empirical = 0.0;
  double se = 0.0;
  double reference = 0.0;
};

struct MomentTable {
  int order = 0;
  std::vector<MomentRow> rows;
};

/// Empirical E[prod_j Y(t_j)] for every nondecreasing `order`-tuple of `times`.
inline MomentTable empirical_moments(const PathEnsemble& ens, std::span<const double> times, int order,
                                     const Kernel& reference) {
  if (order < 1 || order > 4) throw std::invalid_argument("order must lie in 1..4");
  std::vector<std::size_t> idx;
  for (double t : times) idx.push_back(ens.index_of(t));
  MomentTable table;
  table.order = order;
  std::vector<std::size_t> pick(static_cast<std::size_t>(order), 0);
  std::vector<double> per(ens.count);
  while (true) {
    MomentRow row;
    for (auto p : pick) row.times.push_back(times[p]);
    for (std::size_t r = 0; r < ens.count; ++r) {
      double prod = 1.0;
      for (auto p : pick) prod *= ens.at(r, idx[p]);
      per[r] = prod;
    }
    const auto est = jackknife_mean(per);
    row.empirical = est.mean;
    row.se = est.se;
    row.reference = wick_moment(row.times, reference);
    table.rows.push_back(std::move(row));
    // next nondecreasing tuple
    int j = order - 1;
    while (j >= 0 && pick[static_cast<std::size_t>(j)] + 1 == times.size()) --j;
    if (j < 0) break;
    ++pick[static_cast<std::size_t>(j)];
    for (auto i = static_cast<std::size_t>(j) + 1; i < pick.size(); ++i) pick[i] = pick[static_cast<std::size_t>(j)];
  }
  return table;
}

struct VariationInMean {
  double mean = 0.0;
  double se = 0.0;
  double reference = 0.0;  ///< C_p t
};

/// Ensemble mean of the p-th variation at the finest level of seq.
inline VariationInMean pth_variation_in_mean(const PathEnsemble& ens, const PartitionSequence& seq, double p,
                                             double t) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  const LevelPositions pos(seq);
  std::vector<double> per(ens.count);
  for (std::size_t r = 0; r < ens.count; ++r) per[r] = pth_variation(ens.path(r), seq, pos, seq.depth(), p, t);
  const auto est = jackknife_mean(per);
  return {est.mean, est.se, half_normal_moment(p) * t};
}

}  // namespace rough
