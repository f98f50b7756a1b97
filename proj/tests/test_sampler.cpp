#include <gtest/gtest.h>

#include <cmath>

#include "rough/sampler.hpp"
#include "rough/stats.hpp"

using namespace rough;

TEST(Sampler, ExampleAStructure) {
  const auto f = deterministic_example_a(0.2, 8);
  ASSERT_EQ(f.levels(), 8);
  EXPECT_EQ(f(0, 0), 1.0);
  EXPECT_EQ(f(1, 0), std::exp2(0.2));
  EXPECT_EQ(f(1, 1), std::exp2(0.2));
  // m = 4: s = floor(16 / 4^{1/4}) = 11 -> k in {0, 11} plus the last index 15
  for (std::size_t k = 0; k < 16; ++k)
    EXPECT_EQ(f(4, k), (k == 0 || k == 11 || k == 15) ? std::exp2(0.8) : 0.0) << k;
  EXPECT_THROW(deterministic_example_a(0.4, 8), std::invalid_argument);
}

TEST(Sampler, ExampleBStructure) {
  const auto f = deterministic_example_b(8);
  EXPECT_EQ(f(0, 0), 0.0);
  for (std::size_t k = 0; k < 32; ++k) EXPECT_EQ(f(5, k), k % 5 == 0 ? std::sqrt(5.0) : 0.0) << k;
}

TEST(Sampler, BernoulliMaskKeepsFraction) {
  auto f = deterministic_example_b(16);
  std::size_t before = 0, after = 0;
  for (double v : f.flat()) before += v != 0.0;
  ReplicaRng rng(3, 0);
  apply_bernoulli_mask(f, 0.5, rng);
  for (double v : f.flat()) after += v != 0.0;
  EXPECT_NEAR(static_cast<double>(after) / before, 0.5, 0.02);
  EXPECT_THROW(apply_bernoulli_mask(f, 1.5, rng), std::invalid_argument);
}

TEST(Sampler, IidMomentsPerLaw) {
  const SchauderBasis basis(PartitionSequence::dyadic(1.0, 15), 14);
  for (auto law : {MarginalLaw::standard_normal, MarginalLaw::uniform_sqrt3, MarginalLaw::beta22,
                   MarginalLaw::beta_half_half, MarginalLaw::three_point}) {
    const auto c = draw_iid_coeffs(MarginalSpec::single(law), basis, 9);
    const auto mom = central_moments(c.flat());
    EXPECT_NEAR(mom.mean, 0.0, 0.02) << to_string(law);
    EXPECT_NEAR(mom.m2, 1.0, 0.03) << to_string(law);
    EXPECT_NEAR(mom.kurtosis(), law_moments(law).fourth, 0.1) << to_string(law);
  }
}

TEST(Sampler, PearsonClosedForms) {
  const PearsonMap uu(MarginalLaw::uniform_sqrt3, MarginalLaw::uniform_sqrt3);
  EXPECT_NEAR(*uu.inverse(0.5), 0.5176380902050415, 1e-15);
  EXPECT_NEAR(uu.forward(*uu.inverse(0.3)), 0.3, 1e-14);
  const PearsonMap nu(MarginalLaw::uniform_sqrt3, MarginalLaw::standard_normal);
  EXPECT_NEAR(*nu.inverse(0.5), 0.5116633539732443, 1e-15);
  EXPECT_FALSE(nu.inverse(0.99).has_value());
}

// For a normal/other pair the output correlation is r E[Z q(Phi(Z))]; the
// slopes are from adaptive quadrature.
TEST(Sampler, PearsonTabulatedMatchesQuadrature) {
  const PearsonMap nb(MarginalLaw::standard_normal, MarginalLaw::beta22);
  const PearsonMap nh(MarginalLaw::standard_normal, MarginalLaw::beta_half_half);
  for (double r : {-0.9, -0.4, 0.1, 0.5, 1.0}) {
    EXPECT_NEAR(nb.forward(r), r * 0.991951166462451, 2e-4);
    EXPECT_NEAR(nh.forward(r), r * 0.9484295827245055, 2e-4);
  }
  EXPECT_FALSE(nh.inverse(0.97).has_value());
  const PearsonMap bb(MarginalLaw::beta22, MarginalLaw::beta_half_half);
  for (double rho : {-0.5, 0.0, 0.3, 0.8}) EXPECT_NEAR(bb.forward(*bb.inverse(rho)), rho, 1e-6);
}

TEST(Sampler, GeneratorIsReproducibleAcrossThreads) {
  PathConfig cfg;
  cfg.seed = 7;
  cfg.max_level = 9;
  cfg.count = 16;
  cfg.H = 0.3;
  cfg.marginal = MarginalSpec::mixed();
  cfg.threads = 1;
  const auto a = fake_fbm_paths(cfg);
  cfg.threads = 4;
  const auto b = fake_fbm_paths(cfg);
  EXPECT_EQ(a.values, b.values);
  cfg.seed = 8;
  EXPECT_NE(fake_fbm_paths(cfg).values, a.values);
}

TEST(Sampler, HalfHurstMatchesBrownian) {
  PathConfig cfg;
  cfg.seed = 21;
  cfg.max_level = 8;
  cfg.count = 5;
  cfg.include_endpoint = true;
  const auto bm = fake_bm_paths(cfg);
  cfg.H = 0.5;
  const auto fbm = fake_fbm_paths(cfg);
  EXPECT_EQ(bm.values, fbm.values);
}

TEST(Sampler, PathsStartAtZero) {
  PathConfig cfg;
  cfg.max_level = 6;
  cfg.count = 3;
  const auto ens = fake_bm_paths(cfg);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(ens.at(r, 0), 0.0);
    EXPECT_EQ(ens.at(r, ens.grid.size() - 1), 0.0);  // bridge without the endpoint term
  }
  EXPECT_THROW(ens.index_of(0.3), std::invalid_argument);
  EXPECT_EQ(ens.index_of(0.5), 64u);
}

TEST(Sampler, ArgumentChecks) {
  PathConfig cfg;
  cfg.H = 0.3;
  EXPECT_THROW(fake_bm_paths(cfg), std::invalid_argument);
  cfg.H.reset();
  EXPECT_THROW(fake_fbm_paths(cfg), std::invalid_argument);
  cfg.count = 0;
  EXPECT_THROW(PathGenerator{cfg}, std::invalid_argument);
  cfg.count = 1;
  cfg.max_level = 4;
  cfg.H = 0.3;
  cfg.marginal = MarginalSpec::single(MarginalLaw::three_point);
  EXPECT_THROW(PathGenerator{cfg}, std::invalid_argument);
}

// Copula coefficients keep their marginal scale and, with the Pearson
// correction, their target correlation.
TEST(Sampler, CopulaSecondMoments) {
  const SchauderBasis basis(PartitionSequence::dyadic(1.0, 4), 3);
  const auto cov = assemble_covariance(basis, 0.25);
  const auto spec = MarginalSpec::single(MarginalLaw::uniform_sqrt3);
  const auto plan = plan_copula(cov, basis, spec, true);
  EXPECT_EQ(plan.pearson_fallbacks, 0u);
  const int n = 40000;
  const auto D = static_cast<std::size_t>(cov.dim());
  std::vector<double> sum2(D * D, 0.0), draw(D), latent;
  for (int r = 0; r < n; ++r) {
    ReplicaRng rng(99, static_cast<std::uint64_t>(r));
    draw_copula(plan, rng, latent, draw);
    for (std::size_t i = 0; i < D; ++i) {
      ASSERT_LE(std::abs(draw[i]), std::sqrt(3.0) * plan.scale[i] + 1e-12);
      for (std::size_t j = 0; j <= i; ++j) sum2[i * D + j] += draw[i] * draw[j];
    }
  }
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double ref = cov.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double scale = plan.scale[i] * plan.scale[j];
      EXPECT_NEAR(sum2[i * D + j] / n, ref, 0.025 * scale) << i << ',' << j;
    }
}
