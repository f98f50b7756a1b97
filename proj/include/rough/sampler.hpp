#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rough/fbm_model.hpp"
#include "rough/marginals.hpp"
#include "rough/partition.hpp"
#include "rough/rng.hpp"
#include "rough/schauder.hpp"
#include "rough/special_functions.hpp"
#include "rough/version.hpp"

namespace rough {

// ---------------------------------------------------------------------------
// deterministic fields on the dyadic grid

namespace detail {
inline std::vector<std::size_t> dyadic_level_sizes(int depth) {
  std::vector<std::size_t> sizes;
  for (int m = 0; m < depth; ++m) sizes.push_back(std::size_t{1} << m);
  return sizes;
}
}  // namespace detail

/// theta_{m,k} = 2^{eps0 m} on the sparse k-set {j s_m wedge (2^m - 1)},
/// s_m = floor(2^m / m^{1/4}); level 0 carries a single 1 at k = 0.
inline CoefficientField deterministic_example_a(double eps0, int depth) {
  if (!(eps0 > 0.0 && eps0 < 1.0 / 3.0)) throw std::invalid_argument("eps0 must lie in (0, 1/3)");
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  CoefficientField field(detail::dyadic_level_sizes(depth), std::vector<double>((std::size_t{1} << depth) - 1, 0.0));
  field(0, 0) = 1.0;
  for (int m = 1; m < depth; ++m) {
    const std::size_t last = (std::size_t{1} << m) - 1;
    const auto step = static_cast<std::size_t>(std::floor(std::ldexp(1.0, m) / std::pow(m, 0.25)));
    const double value = std::exp2(eps0 * m);
    for (std::size_t k = 0; k <= last; k += step) field(m, k) = value;
    field(m, last) = value;
  }
  return field;
}

/// theta_{m,k} = sqrt(m) at k = 0, m, 2m, ..., floor((2^m - 1)/m) m.
inline CoefficientField deterministic_example_b(int depth) {
  if (depth < 2) throw std::invalid_argument("depth must be >= 2");
  CoefficientField field(detail::dyadic_level_sizes(depth), std::vector<double>((std::size_t{1} << depth) - 1, 0.0));
  for (int m = 1; m < depth; ++m) {
    const std::size_t last = (std::size_t{1} << m) - 1;
    const auto step = static_cast<std::size_t>(m);
    for (std::size_t k = 0; k <= last; k += step) field(m, k) = std::sqrt(static_cast<double>(m));
  }
  return field;
}

/// Multiplies each coefficient by an independent Bernoulli(q) keep flag.
inline void apply_bernoulli_mask(CoefficientField& field, double q, ReplicaRng& rng) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("mask probability must lie in [0, 1]");
  for (double& th : field.flat())
    if (!(rng.uniform() < q)) th = 0.0;
}

// ---------------------------------------------------------------------------
// iid coefficients

/// Independent draws per (m, k) in flat order; one uniform per coefficient,
/// followed by one mask uniform when the spec carries a mask.
inline void draw_iid_into(const MarginalSpec& spec, const SchauderBasis& basis, ReplicaRng& rng,
                          CoefficientField& out) {
  require_shape(out, basis);
  for (int m = 0; m < basis.levels(); ++m) {
    const MarginalLaw law = spec.law_at(m);
    for (double& th : out.level(m)) {
      th = draw_law(law, rng);
      if (spec.mask_q && !(rng.uniform() < *spec.mask_q)) th = 0.0;
    }
  }
}

inline CoefficientField draw_iid_coeffs(const MarginalSpec& spec, const SchauderBasis& basis, std::uint64_t seed,
                                        std::uint64_t replica = 0) {
  spec.check();
  ReplicaRng rng(seed, replica);
  CoefficientField out(basis);
  draw_iid_into(spec, basis, rng, out);
  return out;
}

// ---------------------------------------------------------------------------
// Pearson correction for the Gaussian copula

/// Maps a latent normal correlation r to the Pearson correlation of
/// (qa(Phi(Z1)), qb(Phi(Z2))) and back.
class PearsonMap {
 public:
  PearsonMap(MarginalLaw a, MarginalLaw b) : a_(a), b_(b) {
    if (a > b) std::swap(a_, b_);
    kind_ = classify();
    if (kind_ == Kind::tabulated) tabulate();
  }

  /// Output correlation for latent correlation r.
  double forward(double r) const {
    switch (kind_) {
      case Kind::identity:
        return r;
      case Kind::uniform_uniform:
        return 6.0 / std::numbers::pi * std::asin(r / 2.0);
      case Kind::normal_uniform:
        return r * std::sqrt(3.0 / std::numbers::pi);
      case Kind::tabulated:
        return interpolate(grid_r_, grid_g_, r);
    }
    return r;
  }

  /// Latent correlation giving output correlation rho, or nullopt when rho is unreachable.
  std::optional<double> inverse(double rho) const {
    switch (kind_) {
      case Kind::identity:
        return rho;
      case Kind::uniform_uniform:
        return 2.0 * std::sin(std::numbers::pi * rho / 6.0);
      case Kind::normal_uniform: {
        const double r = rho / std::sqrt(3.0 / std::numbers::pi);
        if (std::abs(r) > 1.0) return std::nullopt;
        return r;
      }
      case Kind::tabulated:
        if (rho < grid_g_.front() || rho > grid_g_.back()) return std::nullopt;
        return interpolate(grid_g_, grid_r_, rho);
    }
    return std::nullopt;
  }

 private:
  enum class Kind { identity, uniform_uniform, normal_uniform, tabulated };

  Kind classify() const {
    using L = MarginalLaw;
    if (a_ == L::standard_normal && b_ == L::standard_normal) return Kind::identity;
    if (a_ == L::uniform_sqrt3 && b_ == L::uniform_sqrt3) return Kind::uniform_uniform;
    if (a_ == L::standard_normal && b_ == L::uniform_sqrt3) return Kind::normal_uniform;
    return Kind::tabulated;
  }

  static double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto j = static_cast<std::size_t>(it - xs.begin());
    const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return ys[j - 1] + w * (ys[j] - ys[j - 1]);
  }

  // q(Phi(z)) tabulated on a fine z grid, interpolated linearly
  struct Transform {
    static constexpr double zmax = 9.0;
    static constexpr int n = 18001;
    std::vector<double> values;
    explicit Transform(MarginalLaw law) : values(n) {
      for (int i = 0; i < n; ++i) {
        const double z = -zmax + 2.0 * zmax * i / (n - 1);
        values[static_cast<std::size_t>(i)] =
            law == MarginalLaw::standard_normal ? z : law_quantile(law, std::clamp(normal_cdf(z), 1e-300, 1.0 - 1e-16));
      }
    }
    double operator()(double z) const {
      const double s = (std::clamp(z, -zmax, zmax) + zmax) / (2.0 * zmax) * (n - 1);
      const auto i = std::min(static_cast<int>(s), n - 2);
      const double w = s - i;
      return values[static_cast<std::size_t>(i)] * (1.0 - w) + values[static_cast<std::size_t>(i) + 1] * w;
    }
  };

  void tabulate() {
    const Transform fa(a_);
    const Transform fb(b_);
    const auto [x, w] = gauss_hermite(80);
    const int points = 401;
    for (int i = 0; i < points; ++i) {
      const double r = -1.0 + 2.0 * i / (points - 1);
      const double s = std::sqrt(std::max(0.0, 1.0 - r * r));
      double sum = 0.0;
      for (std::size_t p = 0; p < x.size(); ++p) {
        const double z1 = std::numbers::sqrt2 * x[p];
        const double va = fa(z1);
        double inner = 0.0;
        for (std::size_t q = 0; q < x.size(); ++q) inner += w[q] * fb(r * z1 + s * std::numbers::sqrt2 * x[q]);
        sum += w[p] * va * inner;
      }
      grid_r_.push_back(r);
      grid_g_.push_back(sum / std::numbers::pi);
    }
    // g is nondecreasing in r; enforce it against quadrature noise
    for (std::size_t i = 1; i < grid_g_.size(); ++i) grid_g_[i] = std::max(grid_g_[i], grid_g_[i - 1]);
  }

  MarginalLaw a_;
  MarginalLaw b_;
  Kind kind_ = Kind::identity;
  std::vector<double> grid_r_;
  std::vector<double> grid_g_;
};

// ---------------------------------------------------------------------------
// Gaussian copula

/// Lower factor of the latent correlation matrix plus per-index scale and law.
struct CopulaPlan {
  Eigen::MatrixXd factor;           ///< rows have unit Euclidean norm
  std::vector<double> scale;        ///< sigma_i
  std::vector<MarginalLaw> laws;    ///< marginal law per matrix index
  double relative_jitter = 0.0;     ///< jitter of the factorization behind `factor`
  std::size_t pearson_fallbacks = 0;
  std::vector<std::string> warnings;
};

inline void normalize_rows(Eigen::MatrixXd& lower) {
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    const double norm = lower.row(i).head(i + 1).norm();
    if (norm > 0.0) lower.row(i).head(i + 1) /= norm;
  }
}

/// Builds the copula factor. Matrix index 0 is the endpoint when cov includes it
/// (always normal); coefficient indices use spec.law_at(level).
inline CopulaPlan plan_copula(const CoeffCovariance& cov, const SchauderBasis& basis, const MarginalSpec& spec,
                              bool pearson_correct, const JitterPolicy& policy = {}) {
  spec.check();
  const Eigen::Index n = cov.dim();
  const Eigen::Index off = cov.coeff_offset();
  if (n != static_cast<Eigen::Index>(basis.size()) + off)
    throw std::invalid_argument("covariance dimension does not match basis");
  CopulaPlan plan;
  plan.laws.resize(static_cast<std::size_t>(n), MarginalLaw::standard_normal);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const MarginalLaw law = spec.law_at(basis.index(i).m);
    if (!is_continuous(law)) throw std::invalid_argument("copula mode needs continuous marginal laws");
    plan.laws[i + static_cast<std::size_t>(off)] = law;
  }
  plan.scale.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) plan.scale[static_cast<std::size_t>(i)] = cov.stddev(i);

  bool all_normal = std::all_of(plan.laws.begin(), plan.laws.end(),
                                [](MarginalLaw l) { return l == MarginalLaw::standard_normal; });
  if (!pearson_correct || all_normal) {
    plan.factor = cov.factor;
    normalize_rows(plan.factor);
    plan.relative_jitter = cov.relative_jitter;
    return plan;
  }

  std::map<std::pair<MarginalLaw, MarginalLaw>, std::unique_ptr<PearsonMap>> maps;
  auto map_for = [&](MarginalLaw a, MarginalLaw b) -> const PearsonMap& {
    if (a > b) std::swap(a, b);
    auto& slot = maps[{a, b}];
    if (!slot) slot = std::make_unique<PearsonMap>(a, b);
    return *slot;
  };
  Eigen::MatrixXd latent(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    latent(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double rho = cov.matrix(i, j) / (plan.scale[static_cast<std::size_t>(i)] * plan.scale[static_cast<std::size_t>(j)]);
      const auto r = map_for(plan.laws[static_cast<std::size_t>(i)], plan.laws[static_cast<std::size_t>(j)]).inverse(rho);
      double value = rho;
      if (r) {
        value = *r;
      } else {
        ++plan.pearson_fallbacks;
      }
      latent(i, j) = latent(j, i) = value;
    }
  }
  if (plan.pearson_fallbacks > 0)
    plan.warnings.push_back("pearson correction out of range for " + std::to_string(plan.pearson_fallbacks) +
                            " pairs; those pairs use the uncorrected correlation");
  auto f = factorize(latent, policy);
  plan.factor = std::move(f.lower);
  plan.relative_jitter = f.relative_jitter;
  if (f.relative_jitter > 0.0)
    plan.warnings.push_back("corrected latent correlation needed relative jitter " + std::to_string(f.relative_jitter));
  normalize_rows(plan.factor);
  return plan;
}

/// Draws one copula vector into `out` (matrix index order). Consumes exactly
/// dim() uniforms, one per latent normal, in index order.
inline void draw_copula(const CopulaPlan& plan, ReplicaRng& rng, std::vector<double>& latent, std::span<double> out) {
  const auto n = plan.factor.rows();
  latent.resize(static_cast<std::size_t>(n));
  for (auto& z : latent) z = normal_quantile(rng.uniform());
  // lower factor times latent vector, column by column; every entry still sums j = 0..i in order
  thread_local std::vector<double> acc;
  acc.assign(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double* col = plan.factor.data() + j * n;
    const double zj = latent[static_cast<std::size_t>(j)];
    for (Eigen::Index i = j; i < n; ++i) acc[static_cast<std::size_t>(i)] += col[i] * zj;
  }
  for (std::size_t k = 0; k < acc.size(); ++k) {
    const double z = acc[k];
    const MarginalLaw law = plan.laws[k];
    const double v = law == MarginalLaw::standard_normal ? z : law_quantile(law, std::clamp(normal_cdf(z), 0x1.0p-60, 1.0 - 0x1.0p-53));
    out[k] = plan.scale[k] * v;
  }
}

/// Correlated coefficient field through the Gaussian copula.
inline CoefficientField draw_correlated_coeffs(const CoeffCovariance& cov, const SchauderBasis& basis,
                                               const MarginalSpec& spec, std::uint64_t seed, bool pearson_correct,
                                               std::uint64_t replica = 0) {
  const CopulaPlan plan = plan_copula(cov, basis, spec, pearson_correct);
  ReplicaRng rng(seed, replica);
  std::vector<double> latent;
  std::vector<double> values(static_cast<std::size_t>(cov.dim()));
  draw_copula(plan, rng, latent, values);
  CoefficientField field(basis);
  const auto off = static_cast<std::size_t>(cov.coeff_offset());
  std::copy(values.begin() + static_cast<std::ptrdiff_t>(off), values.end(), field.flat().begin());
  if (off == 1) field.set_endpoints(0.0, values[0]);
  return field;
}

// ---------------------------------------------------------------------------
// path ensembles

struct PathConfig {
  std::uint64_t seed = 0;
  int max_level = 14;  ///< levels m = 0..max_level; paths live on pi^{max_level+1}
  std::size_t count = 1;
  PartitionKind kind = PartitionKind::dyadic;
  double ratio = 2.5;  ///< shifted-binary split ratio
  double horizon = 1.0;
  std::optional<double> H;  ///< absent: Brownian coefficients
  MarginalSpec marginal = MarginalSpec::single(MarginalLaw::standard_normal);
  bool pearson_correct = false;
  /// Add Z t/T with Z the endpoint value (normal; correlated with the coefficients under fBM).
  bool include_endpoint = false;
  JitterPolicy jitter;
  unsigned threads = 1;
};

struct EnsembleManifest {
  std::uint64_t seed = 0;
  std::string generator_version = std::string(version);
  std::string seeding = "mt19937_64 per replica, seed_seq(master seed, replica index)";
  double relative_jitter = 0.0;
  double absolute_jitter = 0.0;
  double copula_jitter = 0.0;
  std::size_t pearson_fallbacks = 0;
  std::vector<std::string> warnings;
};

inline PartitionSequence make_partition(PartitionKind kind, double horizon, int depth, double ratio) {
  switch (kind) {
    case PartitionKind::dyadic:
      return PartitionSequence::dyadic(horizon, depth);
    case PartitionKind::shifted_binary:
      return PartitionSequence::shifted_binary(horizon, depth, ratio);
    case PartitionKind::custom:
      break;
  }
  throw std::invalid_argument("custom partitions must be loaded from a file");
}

/// Reproducible per-replica path generator. path(r, ...) depends only on the
/// configuration and r, so any scheduling of replicas gives the same ensemble.
class PathGenerator {
 public:
  explicit PathGenerator(PathConfig config)
      : PathGenerator(make_partition(config.kind, config.horizon, config.max_level + 1, config.ratio), config) {}

  PathGenerator(PartitionSequence seq, PathConfig config) : config_(std::move(config)), seq_(std::move(seq)) {
    config_.marginal.check();
    if (config_.count < 1) throw std::invalid_argument("count must be >= 1");
    basis_ = SchauderBasis(seq_, config_.max_level);
    manifest_.seed = config_.seed;
    if (config_.H) {
      check_hurst(*config_.H);
      for (int m = 0; m < basis_.levels(); ++m)
        if (!is_continuous(config_.marginal.law_at(m)))
          throw std::invalid_argument("copula mode needs continuous marginal laws");
      cov_ =assemble_covariance(basis_, *config_.H, config_.jitter, config_.include_endpoint, config_.threads);
      plan_ = plan_copula(*cov_, basis_, config_.marginal, config_.pearson_correct, config_.jitter);
      manifest_.relative_jitter = cov_->relative_jitter;
      manifest_.absolute_jitter = cov_->absolute_jitter;
      manifest_.copula_jitter = plan_->relative_jitter;
      manifest_.pearson_fallbacks = plan_->pearson_fallbacks;
      manifest_.warnings = plan_->warnings;
      if (config_.marginal.mask_q) manifest_.warnings.push_back("bernoulli mask applied after the copula");
    } else if (config_.include_endpoint && seq_.horizon() <= 0.0) {
      throw std::invalid_argument("horizon must be positive");
    }
  }

  const PathConfig& config() const { return config_; }
  const PartitionSequence& partition() const { return seq_; }
  const SchauderBasis& basis() const { return basis_; }
  const EnsembleManifest& manifest() const { return manifest_; }
  const std::optional<CoeffCovariance>& covariance() const { return cov_; }
  std::span<const double> grid() const { return basis_.grid(); }

  /// Coefficient field of replica r.
  void coefficients(std::uint64_t r, CoefficientField& field, std::vector<double>& scratch) const {
    ReplicaRng rng(config_.seed, r);
    if (!cov_) {
      double z = 0.0;
      // the endpoint uniform comes first, matching the copula index order
      if (config_.include_endpoint) z = std::sqrt(seq_.horizon()) * normal_quantile(rng.uniform());
      draw_iid_into(config_.marginal, basis_, rng, field);
      field.set_endpoints(0.0, z);
      return;
    }
    thread_local std::vector<double> out;
    out.resize(static_cast<std::size_t>(cov_->dim()));
    draw_copula(*plan_, rng, scratch, out);
    const auto off = static_cast<std::size_t>(cov_->coeff_offset());
    std::copy(out.begin() + static_cast<std::ptrdiff_t>(off), out.end(), field.flat().begin());
    field.set_endpoints(0.0, off == 1 ? out[0] : 0.0);
    if (config_.marginal.mask_q)
      for (double& th : field.flat())
        if (!(rng.uniform() < *config_.marginal.mask_q)) th = 0.0;
  }

  CoefficientField coefficients(std::uint64_t r) const {
    CoefficientField field(basis_);
    std::vector<double> scratch;
    coefficients(r, field, scratch);
    return field;
  }

  /// Path of replica r on grid().
  void path(std::uint64_t r, std::span<double> out) const {
    thread_local CoefficientField field;
    thread_local std::vector<double> scratch;
    if (!field.matches(basis_)) field = CoefficientField(basis_);
    coefficients(r, field, scratch);
    reconstruct_on_grid(field, basis_, out, scratch);
  }

  std::vector<double> path(std::uint64_t r) const {
    std::vector<double> out(grid().size());
    path(r, out);
    return out;
  }

  /// Calls fn(r, path) for r = 0..count-1 from `threads` workers. fn must be
  /// safe to call concurrently for distinct r.
  void for_each_path(const std::function<void(std::uint64_t, std::span<const double>)>& fn) const {
    parallel_for(config_.count, config_.threads, [&](std::size_t r) {
      thread_local std::vector<double> buffer;
      buffer.resize(grid().size());
      path(r, buffer);
      fn(r, buffer);
    });
  }

 private:
  PathConfig config_;
  PartitionSequence seq_;
  SchauderBasis basis_;
  std::optional<CoeffCovariance> cov_;
  std::optional<CopulaPlan> plan_;
  EnsembleManifest manifest_;
};

/// Materialized ensemble: count rows of grid().size() values.
struct PathEnsemble {
  std::vector<double> grid;
  std::size_t count = 0;
  std::vector<double> values;  ///< row-major
  EnsembleManifest manifest;

  std::span<const double> path(std::size_t r) const {
    return std::span<const double>(values).subspan(r * grid.size(), grid.size());
  }
  double at(std::size_t r, std::size_t i) const { return values[r * grid.size() + i]; }
  /// Grid index of time t, which must be a grid point.
  std::size_t index_of(double t) const {
    const auto it = std::lower_bound(grid.begin(), grid.end(), t);
    if (it == grid.end() || *it != t) throw std::invalid_argument("time is not a grid point");
    return static_cast<std::size_t>(it - grid.begin());
  }
};

inline PathEnsemble generate_ensemble(const PathGenerator& gen) {
  PathEnsemble ens;
  ens.grid.assign(gen.grid().begin(), gen.grid().end());
  ens.count = gen.config().count;
  ens.values.resize(ens.count * ens.grid.size());
  ens.manifest = gen.manifest();
  const std::size_t width = ens.grid.size();
  gen.for_each_path([&](std::uint64_t r, std::span<const double> p) {
    std::copy(p.begin(), p.end(), ens.values.begin() + static_cast<std::ptrdiff_t>(r * width));
  });
  return ens;
}

inline PathEnsemble fake_bm_paths(const PathConfig& config) {
  if (config.H) throw std::invalid_argument("fake_bm_paths takes no Hurst index");
  return generate_ensemble(PathGenerator(config));
}

inline PathEnsemble fake_fbm_paths(const PathConfig& config) {
  if (!config.H) throw std::invalid_argument("fake_fbm_paths needs a Hurst index");
  return generate_ensemble(PathGenerator(config));
}

}  // namespace rough
