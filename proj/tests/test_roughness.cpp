#include <gtest/gtest.h>

#include <random>

#include "rough/roughness.hpp"
#include "rough/sampler.hpp"

using namespace rough;

namespace {

CoefficientField synthetic_field(const PartitionSequence& seq, double beta) {
  std::vector<std::size_t> sizes;
  std::vector<double> theta;
  for (int m = 0; m < seq.depth(); ++m) {
    const std::size_t n = seq.level(m).interval_count();
    sizes.push_back(n);
    theta.insert(theta.end(), n, std::pow(seq.level(m + 1).mesh(), beta));
  }
  return CoefficientField(sizes, theta);
}

std::vector<double> samples_of(const PartitionSequence& seq, double (*f)(double)) {
  std::vector<double> x;
  for (double t : seq.level(seq.depth()).points()) x.push_back(f(t));
  return x;
}

}  // namespace

TEST(Holder, SeminormOnGrid) {
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  EXPECT_EQ(holder_seminorm_grid(std::vector<double>(5, 2.0), grid, 0.5), 0.0);
  std::vector<double> x;
  for (double t : grid) x.push_back(std::sqrt(t));
  EXPECT_NEAR(holder_seminorm_grid(x, grid, 0.5), 1.0, 1e-15);
  EXPECT_NEAR(holder_seminorm_grid(grid, grid, 1.0), 1.0, 1e-15);
  EXPECT_THROW(holder_seminorm_grid(x, grid, 0.0), std::invalid_argument);
  EXPECT_THROW(holder_seminorm_grid(x, grid, 1.5), std::invalid_argument);
}

TEST(Holder, SyntheticPowerFields) {
  for (auto seq : {PartitionSequence::dyadic(1.0, 20), PartitionSequence::shifted_binary(1.0, 20, 2.5)})
    for (double beta : {-0.3, -0.1, 0.1, 0.3}) {
      const auto est = holder_exponent_estimate(synthetic_field(seq, beta), seq);
      EXPECT_NEAR(est.alpha_hat, 0.5 + beta, 0.02) << to_string(seq.kind()) << " beta " << beta;
      EXPECT_EQ(est.branch, beta < 0 ? HolderBranch::growing : HolderBranch::decaying);
      EXPECT_FALSE(est.degenerate);
    }
}

TEST(Holder, ConstantFieldIsBounded) {
  const auto seq = PartitionSequence::dyadic(1.0, 12);
  const auto est = holder_exponent_estimate(synthetic_field(seq, 0.0), seq);
  EXPECT_EQ(est.branch, HolderBranch::bounded);
  EXPECT_EQ(est.alpha_hat, 0.5);
  EXPECT_EQ(est.trace.size(), 12u);
}

TEST(Holder, QuarterDecay) {
  const auto seq = PartitionSequence::dyadic(1.0, 20);
  std::vector<std::size_t> sizes;
  std::vector<double> theta;
  for (int m = 0; m < 20; ++m) {
    sizes.push_back(std::size_t{1} << m);
    theta.insert(theta.end(), sizes.back(), std::pow(2.0, -0.25 * m));
  }
  EXPECT_NEAR(holder_exponent_estimate(CoefficientField(sizes, theta), seq).alpha_hat, 0.75, 0.02);
}

TEST(Holder, ExampleAWindow) {
  const auto seq = PartitionSequence::dyadic(1.0, 20);
  HolderOptions opt;
  opt.first_level = 10;
  const auto est = holder_exponent_estimate(deterministic_example_a(0.2, 20), seq, opt);
  EXPECT_EQ(est.branch, HolderBranch::growing);
  EXPECT_NEAR(est.alpha_hat, 0.3, 0.02);
  EXPECT_EQ(est.first_level, 10);
  EXPECT_EQ(est.last_level, 19);
}

TEST(Holder, ExampleBIsBounded) {
  const auto seq = PartitionSequence::dyadic(1.0, 20);
  const auto est = holder_exponent_estimate(deterministic_example_b(20), seq);
  EXPECT_EQ(est.branch, HolderBranch::bounded);
  EXPECT_EQ(est.alpha_hat, 0.5);
}

TEST(Holder, ZeroFieldIsDegenerate) {
  const auto seq = PartitionSequence::dyadic(1.0, 8);
  const SchauderBasis basis(seq, 7);
  const auto est = holder_exponent_estimate(CoefficientField(basis), seq);
  EXPECT_TRUE(est.degenerate);
  EXPECT_EQ(est.branch, HolderBranch::decaying);
  EXPECT_EQ(est.alpha_hat, 1.0);
}

TEST(Holder, WindowChecks) {
  const auto seq = PartitionSequence::dyadic(1.0, 8);
  HolderOptions opt;
  opt.first_level = 6;
  opt.last_level = 3;
  EXPECT_THROW(holder_exponent_estimate(synthetic_field(seq, 0.1), seq, opt), std::invalid_argument);
  const auto shallow = PartitionSequence::dyadic(1.0, 4);
  EXPECT_THROW(holder_exponent_estimate(synthetic_field(seq, 0.1), shallow), std::invalid_argument);
}

// Property: the grid seminorm of random Brownian-like paths lies between the
// two coefficient bounds.
TEST(HolderProperty, BoundsBracketGridSeminorm) {
  for (auto seq : {PartitionSequence::dyadic(1.0, 10), PartitionSequence::shifted_binary(1.0, 10, 2.5)}) {
    const auto diag = validate(seq);
    const SchauderBasis basis(seq, 9);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto c = draw_iid_coeffs(MarginalSpec::single(MarginalLaw::standard_normal), basis, seed);
      const auto x = reconstruct_on_grid(c, basis);
      for (double alpha : {0.2, 0.4, 0.6}) {
        const auto b = ciesielski_bounds(c, seq, alpha, diag);
        const double norm = holder_seminorm_grid(x, basis.grid(), alpha);
        EXPECT_LE(b.lower, norm * (1 + 1e-12));
        EXPECT_GE(b.upper, norm);
      }
    }
  }
}

TEST(Holder, BoundsNeedCompleteRefining) {
  const auto seq = PartitionSequence::dyadic(1.0, 4);
  auto diag = validate(seq);
  diag.a_hat = 0.0;
  EXPECT_THROW(ciesielski_bounds(synthetic_field(seq, 0.0), seq, 0.4, diag), NotCompleteRefining);
}

TEST(Variation, IdentityPath) {
  const auto seq = PartitionSequence::dyadic(1.0, 10);
  const auto x = samples_of(seq, [](double t) { return t; });
  EXPECT_NEAR(pth_variation(x, seq, 10, 1.0, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(pth_variation(x, seq, 10, 2.0, 1.0), std::ldexp(1.0, -10), 1e-15);
  EXPECT_NEAR(pth_variation(x, seq, 4, 1.0, 0.5), 0.5 + 1.0 / 16.0, 1e-12);  // includes the step from t = 1/2
  const auto curve = variation_curve(x, seq, 3, 1.0);
  ASSERT_EQ(curve.size(), 9u);
  EXPECT_NEAR(curve.back(), 1.0, 1e-14);
  std::vector<int> levels{6, 7, 8, 9, 10};
  const auto v = variation_index_estimate(x, seq, {1.0, 1.5, 2.0}, levels);
  ASSERT_TRUE(v.index_hat.has_value());
  EXPECT_NEAR(*v.index_hat, 1.0, 0.02);
}

TEST(Variation, BrownianIndexNearTwo) {
  const auto seq = PartitionSequence::dyadic(1.0, 16);
  const SchauderBasis basis(seq, 15);
  const auto c = draw_iid_coeffs(MarginalSpec::single(MarginalLaw::standard_normal), basis, 4);
  auto x = reconstruct_on_grid(c, basis);
  const auto v = variation_index_estimate(x, seq, {1.0, 1.5, 2.5, 3.0}, {10, 11, 12, 13, 14, 15, 16});
  ASSERT_TRUE(v.index_hat.has_value());
  EXPECT_NEAR(*v.index_hat, 2.0, 0.1);
  EXPECT_NEAR(pth_variation(x, seq, 16, 2.0, 1.0), 1.0, 0.03);
}

TEST(Variation, ConstantPathIsIndeterminate) {
  const auto seq = PartitionSequence::dyadic(1.0, 8);
  const std::vector<double> x(257, 1.0);
  const auto v = variation_index_estimate(x, seq, {1.0, 2.0}, {5, 6, 7, 8});
  EXPECT_TRUE(v.indeterminate);
  EXPECT_FALSE(v.index_hat.has_value());
}

TEST(Variation, ArgumentChecks) {
  const auto seq = PartitionSequence::dyadic(1.0, 6);
  const std::vector<double> x(65, 0.0);
  EXPECT_THROW(pth_variation(x, seq, 6, 0.5, 1.0), std::invalid_argument);
  EXPECT_THROW(pth_variation(std::vector<double>(10, 0.0), seq, 6, 2.0, 1.0), std::invalid_argument);
  EXPECT_THROW(variation_index_estimate(x, seq, {2.0, 1.0}, {4, 5, 6}), std::invalid_argument);
  EXPECT_THROW(variation_index_estimate(x, seq, {1.0, 9.0}, {4, 5, 6}), std::invalid_argument);
  EXPECT_THROW(variation_index_estimate(x, seq, {1.0, 2.0}, {5, 6}), std::invalid_argument);
}

// Property: the coefficient-side quadratic variation equals the sampled one at t = T.
TEST(VariationProperty, CoefficientQvMatchesSampledQv) {
  const auto seq = PartitionSequence::dyadic(2.0, 10);
  const SchauderBasis basis(seq, 9);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto c = draw_iid_coeffs(MarginalSpec::mixed(), basis, seed);
    c.set_endpoints(0.3, -0.4);
    const auto x = reconstruct_on_grid(c, basis);
    for (int n = 0; n <= 10; ++n)
      EXPECT_NEAR(qv_from_coeffs_dyadic(c, seq, n, 2.0), pth_variation(x, seq, n, 2.0, 2.0), 1e-10);
  }
  EXPECT_THROW(qv_from_coeffs_dyadic(CoefficientField(SchauderBasis(PartitionSequence::shifted_binary(1, 4, 2.5), 3)),
                                     PartitionSequence::shifted_binary(1, 4, 2.5), 2, 1.0),
               UnsupportedPartition);
}

TEST(Variation, ScaledQvOfBrownianEqualsQv) {
  const auto seq = PartitionSequence::dyadic(1.0, 12);
  const SchauderBasis basis(seq, 11);
  const auto x = reconstruct_on_grid(draw_iid_coeffs(MarginalSpec::single(MarginalLaw::standard_normal), basis, 2), basis);
  EXPECT_NEAR(scaled_qv(x, seq, 0.5, 1.0, 12), pth_variation(x, seq, 12, 2.0, 1.0), 1e-12);
  EXPECT_THROW(scaled_qv(x, PartitionSequence::shifted_binary(1.0, 12, 2.5), 0.5, 1.0, 12), UnsupportedPartition);
}
