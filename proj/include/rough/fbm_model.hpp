#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "rough/errors.hpp"
#include "rough/schauder.hpp"

namespace rough {

inline void check_hurst(double H) {
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("Hurst index H must lie in (0, 1)");
}

/// |x|^{2H} with 0^{2H} = 0.
inline double pow2h(double x, double H) {
  const double a = std::abs(x);
  return a == 0.0 ? 0.0 : std::pow(a, 2.0 * H);
}

/// Covariance of the fBM increments over [s, t] and [u, v].
inline double increment_covariance(double s, double t, double u, double v, double H) {
  return 0.5 * (pow2h(t - u, H) + pow2h(s - v, H) - pow2h(t - v, H) - pow2h(s - u, H));
}

/// E[B(t) B(s)] for fBM.
inline double fbm_kernel(double t, double s, double H) {
  return 0.5 * (pow2h(t, H) + pow2h(s, H) - pow2h(t - s, H));
}

/// Increment covariances between the two halves of two supports.
/// xi_ab pairs half a of the first support with half b of the second.
struct XiTerms {
  double xi11 = 0.0;
  double xi22 = 0.0;
  double xi21 = 0.0;
  double xi12 = 0.0;
};

inline XiTerms xi_terms(const SupportTriple& a, const SupportTriple& b, double H) {
  XiTerms xi;
  xi.xi11 = 0.5 * (pow2h(a.t1 - b.t2, H) + pow2h(a.t2 - b.t1, H) - pow2h(a.t1 - b.t1, H) - pow2h(a.t2 - b.t2, H));
  xi.xi22 = 0.5 * (pow2h(a.t2 - b.t3, H) + pow2h(a.t3 - b.t2, H) - pow2h(a.t2 - b.t2, H) - pow2h(a.t3 - b.t3, H));
  xi.xi21 = 0.5 * (pow2h(a.t2 - b.t2, H) + pow2h(a.t3 - b.t1, H) - pow2h(a.t2 - b.t1, H) - pow2h(a.t3 - b.t2, H));
  xi.xi12 = 0.5 * (pow2h(a.t1 - b.t3, H) + pow2h(a.t2 - b.t2, H) - pow2h(a.t1 - b.t2, H) - pow2h(a.t2 - b.t3, H));
  return xi;
}

inline double coeff_variance(const SupportTriple& s, double H) {
  check_hurst(H);
  using L = long double;
  const L h2 = 2.0L * H;
  const L d1 = s.d1();
  const L d2 = s.d2();
  const L p1 = std::pow(d1, h2);
  const L p2 = std::pow(d2, h2);
  const L num = d2 * d2 * p1 + d1 * d1 * p2 - d1 * d2 * (std::pow(d1 + d2, h2) - p1 - p2);
  return static_cast<double>(num / (d1 * d2 * (d1 + d2)));
}

/// Dyadic closed form of the coefficient variance at level m.
inline double dyadic_coeff_variance(int m, double H) {
  check_hurst(H);
  using L = long double;
  const L h2 = 2.0L * H;
  return static_cast<double>(std::abs(2.0L - std::pow(2.0L, h2 - 1.0L)) * std::pow(2.0L, (m + 1) * (1.0L - h2)));
}

inline double coeff_covariance(const SupportTriple& a, const SupportTriple& b, double H) {
  check_hurst(H);
  const XiTerms xi = xi_terms(a, b, H);
  const double a1 = a.d1(), a2 = a.d2(), b1 = b.d1(), b2 = b.d2();
  const double num = a2 * b2 * xi.xi11 + a1 * b1 * xi.xi22 - a1 * b2 * xi.xi21 - b1 * a2 * xi.xi12;
  return num / std::sqrt(a1 * a2 * b1 * b2 * (a1 + a2) * (b1 + b2));
}

/// E[B^H(1) theta_{m,k}]; the formula is specific to the horizon T = 1.
inline double endpoint_covariance(const SupportTriple& s, double H, double horizon = 1.0) {
  check_hurst(H);
  if (horizon != 1.0) throw UnsupportedPartition("endpoint covariance is defined for T = 1 only");
  const double d1 = s.d1();
  const double d2 = s.d2();
  const double first = d2 * (pow2h(1.0 - s.t1, H) + pow2h(s.t2, H) - pow2h(1.0 - s.t2, H) - pow2h(s.t1, H));
  const double second = d1 * (pow2h(1.0 - s.t2, H) + pow2h(s.t3, H) - pow2h(1.0 - s.t3, H) - pow2h(s.t2, H));
  return (first - second) / (2.0 * std::sqrt(d1 * d2 * (d1 + d2)));
}

struct JitterPolicy {
  double start = 1e-12;  ///< first relative jitter tried after a failed factorization
  double max = 1e-6;     ///< largest relative jitter before giving up
};

/// Lower Cholesky factor of a symmetric matrix with the jitter ladder applied.
struct Factorization {
  Eigen::MatrixXd lower;
  double relative_jitter = 0.0;  ///< epsilon; diagonal shift = epsilon * mean diagonal
  double absolute_jitter = 0.0;
};

inline Factorization factorize(const Eigen::MatrixXd& matrix, const JitterPolicy& policy = {}) {
  const Eigen::Index n = matrix.rows();
  const double mean_diag = n > 0 ? matrix.diagonal().mean() : 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(matrix);
  if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0, 0.0};
  for (double eps = policy.start; eps <= policy.max * (1.0 + 1e-9); eps *= 2.0) {
    Eigen::MatrixXd shifted = matrix;
    shifted.diagonal().array() += eps * mean_diag;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), eps, eps * mean_diag};
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix, Eigen::EigenvaluesOnly);
  std::ostringstream msg;
  msg << "covariance matrix not factorizable with jitter up to " << policy.max
      << " * mean diagonal; smallest eigenvalue ~ " << eig.eigenvalues()(0);
  throw NumericalError(msg.str());
}

/// Covariance of the Schauder coefficients of fBM over a flat level-major index.
///
/// With include_endpoint, index 0 holds Z = B^H(1) and the coefficients follow.
struct CoeffCovariance {
  double H = 0.5;
  bool include_endpoint = false;
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd factor;  ///< lower triangular, factor * factor^T = matrix + jitter
  double relative_jitter = 0.0;
  double absolute_jitter = 0.0;

  Eigen::Index dim() const { return matrix.rows(); }
  /// Offset of coefficient flat index 0 within the matrix.
  Eigen::Index coeff_offset() const { return include_endpoint ? 1 : 0; }
  double stddev(Eigen::Index i) const { return std::sqrt(matrix(i, i)); }
};

inline unsigned default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1u : n;
}

/// Runs body(i) for i in [0, n) on up to `threads` workers, striding rows.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) body(i);
    });
  for (auto& th : pool) th.join();
}

inline Eigen::MatrixXd covariance_matrix(const SchauderBasis& basis, double H, bool include_endpoint = false,
                                         unsigned threads = 1) {
  check_hurst(H);
  const auto D = static_cast<Eigen::Index>(basis.size());
  const Eigen::Index off = include_endpoint ? 1 : 0;
  const Eigen::Index n = D + off;
  if (include_endpoint && basis.horizon() != 1.0)
    throw UnsupportedPartition("the endpoint term needs T = 1");
  if (H == 0.5) {
    // independent standard normal coefficients; Var Z = T = 1
    return Eigen::MatrixXd::Identity(n, n);
  }
  Eigen::MatrixXd sigma(n, n);
  const auto sup = basis.supports();
  parallel_for(static_cast<std::size_t>(D), threads, [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i) + off;
    for (std::size_t j = 0; j < i; ++j) {
      const double c = coeff_covariance(sup[i], sup[j], H);
      sigma(r, static_cast<Eigen::Index>(j) + off) = c;
      sigma(static_cast<Eigen::Index>(j) + off, r) = c;
    }
    sigma(r, r) = coeff_variance(sup[i], H);
    if (include_endpoint) {
      const double z = endpoint_covariance(sup[i], H);
      sigma(0, r) = z;
      sigma(r, 0) = z;
    }
  });
  if (include_endpoint) sigma(0, 0) = 1.0;
  return sigma;
}

inline CoeffCovariance assemble_covariance(const SchauderBasis& basis, double H, const JitterPolicy& policy = {},
                                           bool include_endpoint = false, unsigned threads = 1) {
  CoeffCovariance cov;
  cov.H = H;
  cov.include_endpoint = include_endpoint;
  cov.matrix = covariance_matrix(basis, H, include_endpoint, threads);
  auto f = factorize(cov.matrix, policy);
  cov.factor = std::move(f.lower);
  cov.relative_jitter = f.relative_jitter;
  cov.absolute_jitter = f.absolute_jitter;
  return cov;
}

/// Truncated kernel sum_{i,j} sigma_ij e_i(t) e_j(s), with e_{-1}(t) = t for the endpoint term.
inline double kernel_reconstruction(const CoeffCovariance& cov, const SchauderBasis& basis, double t, double s) {
  const Eigen::Index off = cov.coeff_offset();
  if (cov.dim() != static_cast<Eigen::Index>(basis.size()) + off)
    throw std::invalid_argument("covariance dimension does not match basis");
  auto active = [&](double x) {
    std::vector<std::pair<Eigen::Index, double>> out;
    if (off == 1) out.emplace_back(0, x / basis.horizon());
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const double v = basis.support(i).schauder(x);
      if (v != 0.0) out.emplace_back(static_cast<Eigen::Index>(i) + off, v);
    }
    return out;
  };
  const auto et = active(t);
  const auto es = active(s);
  double sum = 0.0;
  for (const auto& [i, a] : et)
    for (const auto& [j, b] : es) sum += cov.matrix(i, j) * a * b;
  return sum;
}

}  // namespace rough
