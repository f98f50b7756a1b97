#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rough/rng.hpp"
#include "rough/special_functions.hpp"

namespace rough {

/// Coefficient laws; every one has mean 0 and variance 1.
enum class MarginalLaw { standard_normal, uniform_sqrt3, beta22, beta_half_half, three_point };

inline std::string_view to_string(MarginalLaw law) {
  switch (law) {
    case MarginalLaw::standard_normal:
      return "standard-normal";
    case MarginalLaw::uniform_sqrt3:
      return "uniform-sqrt3";
    case MarginalLaw::beta22:
      return "beta22";
    case MarginalLaw::beta_half_half:
      return "betaHalfHalf";
    case MarginalLaw::three_point:
      return "threePoint";
  }
  return "standard-normal";
}

inline MarginalLaw marginal_law_from_string(std::string_view name) {
  if (name == "standard-normal") return MarginalLaw::standard_normal;
  if (name == "uniform-sqrt3") return MarginalLaw::uniform_sqrt3;
  if (name == "beta22") return MarginalLaw::beta22;
  if (name == "betaHalfHalf") return MarginalLaw::beta_half_half;
  if (name == "threePoint") return MarginalLaw::three_point;
  throw std::invalid_argument("unknown marginal law '" + std::string(name) + "'");
}

inline bool is_continuous(MarginalLaw law) { return law != MarginalLaw::three_point; }

/// Analytic moments E[X^j], j = 1..4.
struct LawMoments {
  double mean, variance, third, fourth;
};

inline LawMoments law_moments(MarginalLaw law) {
  switch (law) {
    case MarginalLaw::standard_normal:
      return {0.0, 1.0, 0.0, 3.0};
    case MarginalLaw::uniform_sqrt3:
      return {0.0, 1.0, 0.0, 9.0 / 5.0};
    case MarginalLaw::beta22:
      // sqrt(20)(B - 1/2), B ~ Beta(2,2): kurtosis 15/7
      return {0.0, 1.0, 0.0, 15.0 / 7.0};
    case MarginalLaw::beta_half_half:
      // sqrt(8)(B - 1/2) = sqrt2 cos(pi U): kurtosis 3/2
      return {0.0, 1.0, 0.0, 1.5};
    case MarginalLaw::three_point:
      return {0.0, 1.0, 0.0, 3.0};
  }
  return {0.0, 1.0, 0.0, 3.0};
}

/// Almost-sure bound |X| <= bound (infinite for the normal law).
inline double law_bound(MarginalLaw law) {
  switch (law) {
    case MarginalLaw::standard_normal:
      return HUGE_VAL;
    case MarginalLaw::uniform_sqrt3:
    case MarginalLaw::three_point:
      return std::sqrt(3.0);
    case MarginalLaw::beta22:
      return std::sqrt(20.0) / 2.0;
    case MarginalLaw::beta_half_half:
      return std::sqrt(2.0);
  }
  return HUGE_VAL;
}

namespace detail {
inline double beta_scale(MarginalLaw law) {
  return law == MarginalLaw::beta22 ? std::sqrt(20.0) : std::sqrt(8.0);
}
}  // namespace detail

/// Inverse CDF. Beta laws go through the numeric incomplete-beta inverse.
inline double law_quantile(MarginalLaw law, double u) {
  switch (law) {
    case MarginalLaw::standard_normal:
      return normal_quantile(u);
    case MarginalLaw::uniform_sqrt3:
      return std::sqrt(3.0) * (2.0 * u - 1.0);
    case MarginalLaw::beta22:
      return detail::beta_scale(law) * (beta_quantile(2.0, 2.0, u) - 0.5);
    case MarginalLaw::beta_half_half:
      return detail::beta_scale(law) * (beta_quantile(0.5, 0.5, u) - 0.5);
    case MarginalLaw::three_point: {
      const double r = std::sqrt(3.0);
      if (u < 1.0 / 6.0) return -r;
      if (u < 5.0 / 6.0) return 0.0;
      return r;
    }
  }
  throw std::invalid_argument("unknown marginal law");
}

/// Closed-form Beta(2,2) inverse CDF: cubic 3x^2 - 2x^3 = u solved trigonometrically.
inline double beta22_quantile_closed(double u) {
  return 0.5 + std::cos(std::acos(1.0 - 2.0 * u) / 3.0 - 2.0 * std::numbers::pi / 3.0);
}

/// Closed-form arcsine (Beta(1/2,1/2)) inverse CDF.
inline double beta_half_half_quantile_closed(double u) {
  const double s = std::sin(0.5 * std::numbers::pi * u);
  return s * s;
}

/// One draw from one uniform, using closed forms where they exist.
inline double draw_law(MarginalLaw law, ReplicaRng& rng) {
  const double u = rng.uniform();
  switch (law) {
    case MarginalLaw::beta22:
      return detail::beta_scale(law) * (beta22_quantile_closed(u) - 0.5);
    case MarginalLaw::beta_half_half:
      return detail::beta_scale(law) * (beta_half_half_quantile_closed(u) - 0.5);
    default:
      return law_quantile(law, u);
  }
}

/// Law per level plus an optional Bernoulli keep-mask.
struct MarginalSpec {
  MarginalLaw law = MarginalLaw::standard_normal;
  /// When set, odd levels use `odd` and even levels use `even`.
  std::optional<MarginalLaw> odd;
  std::optional<MarginalLaw> even;
  /// Keep probability q of a multiplicative Bernoulli(q) mask.
  std::optional<double> mask_q;

  static MarginalSpec single(MarginalLaw law) { return {law, std::nullopt, std::nullopt, std::nullopt}; }

  /// Normal on odd levels, uniform on even levels.
  static MarginalSpec mixed() {
    return {MarginalLaw::standard_normal, MarginalLaw::standard_normal, MarginalLaw::uniform_sqrt3, std::nullopt};
  }

  MarginalLaw law_at(int m) const {
    if (m % 2 != 0 && odd) return *odd;
    if (m % 2 == 0 && even) return *even;
    return law;
  }

  void check() const {
    if (mask_q && !(*mask_q >= 0.0 && *mask_q <= 1.0))
      throw std::invalid_argument("bernoulli mask probability must lie in [0, 1]");
  }
};

}  // namespace rough
