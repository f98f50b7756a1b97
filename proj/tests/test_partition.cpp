#include <gtest/gtest.h>

#include "rough/partition.hpp"

using namespace rough;

TEST(Partition, DyadicLevels) {
  const auto seq = PartitionSequence::dyadic(1.0, 2);
  ASSERT_EQ(seq.depth(), 2);
  EXPECT_EQ(std::vector<double>(seq.level(0).points().begin(), seq.level(0).points().end()),
            (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(std::vector<double>(seq.level(2).points().begin(), seq.level(2).points().end()),
            (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(PartitionSequence::dyadic(1.0, 15).level(15).size(), 32769u);
}

TEST(Partition, RejectsBadArguments) {
  EXPECT_THROW(PartitionSequence::dyadic(1.0, 0), std::invalid_argument);
  EXPECT_THROW(PartitionSequence::dyadic(0.0, 3), std::invalid_argument);
  EXPECT_THROW(PartitionSequence::shifted_binary(1.0, 3, 1.0), std::invalid_argument);
}

TEST(Partition, ShiftedBinarySplit) {
  const auto one = PartitionSequence::shifted_binary(1.0, 1, 2.5);
  EXPECT_NEAR(one.level(1).points()[1], 0.4, 1e-15);
  const auto two = PartitionSequence::shifted_binary(1.0, 2, 2.5);
  const std::vector<double> want{0.0, 0.16, 0.4, 0.64, 1.0};
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(two.level(2).points()[i], want[i], 1e-15);
}

TEST(Partition, RatioTwoIsDyadic) {
  for (int n = 1; n <= 8; ++n) {
    const auto a = PartitionSequence::shifted_binary(1.0, n, 2.0);
    const auto b = PartitionSequence::dyadic(1.0, n);
    for (int l = 0; l <= n; ++l) {
      const auto pa = a.level(l).points();
      const auto pb = b.level(l).points();
      ASSERT_TRUE(std::equal(pa.begin(), pa.end(), pb.begin(), pb.end()));
    }
  }
}

TEST(Partition, DyadicDiagnostics) {
  const auto d = validate(PartitionSequence::dyadic(1.0, 10));
  EXPECT_EQ(d.M_hat, 2u);
  EXPECT_DOUBLE_EQ(d.c_hat, 1.0);
  EXPECT_DOUBLE_EQ(d.b_hat, 2.0);
  EXPECT_DOUBLE_EQ(d.a_hat, 1.0);
  EXPECT_TRUE(d.every_parent_refined && d.mesh_strictly_decreasing && d.mesh_bound_holds && d.is_finitely_refining);
  EXPECT_TRUE(d.is_balanced(1.0));
  EXPECT_TRUE(d.is_complete_refining());
  for (double r : d.mesh_ratio_per_level) EXPECT_DOUBLE_EQ(r, 2.0);
}

// The balance ratio of the shifted-binary sequence grows as 1.5^n: the
// largest interval shrinks by 0.6 per level and the smallest by 0.4.
TEST(Partition, ShiftedBinaryDiagnostics) {
  const auto d = validate(PartitionSequence::shifted_binary(1.0, 8, 2.5));
  ASSERT_EQ(d.balance_per_level.size(), 9u);
  for (int n = 0; n <= 8; ++n) EXPECT_NEAR(d.balance_per_level[n], std::pow(1.5, n), 1e-9 * std::pow(1.5, n));
  for (double r : d.mesh_ratio_per_level) EXPECT_NEAR(r, 1.0 / 0.6, 1e-12);
  EXPECT_NEAR(d.a_hat, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(d.M_hat, 2u);
  EXPECT_TRUE(d.is_complete_refining());
  EXPECT_FALSE(d.is_balanced(1.5));
}

TEST(Partition, DuplicatedLevelIsNotCompleteRefining) {
  const auto base = PartitionSequence::dyadic(1.0, 3);
  std::vector<std::vector<double>> levels;
  for (int n = 0; n <= 3; ++n) {
    levels.emplace_back(base.level(n).points().begin(), base.level(n).points().end());
    if (n == 1) levels.push_back(levels.back());
  }
  const auto d = validate(PartitionSequence::custom(1.0, levels));
  EXPECT_FALSE(d.is_complete_refining());
  EXPECT_FALSE(d.every_parent_refined);
}

TEST(Partition, NonNestedLevelsRaiseStructuralError) {
  std::vector<std::vector<double>> levels{{0.0, 1.0}, {0.0, 0.5, 1.0}, {0.0, 0.3, 0.6, 1.0}};
  try {
    validate(PartitionSequence::custom(1.0, levels));
    FAIL() << "expected StructuralError";
  } catch (const StructuralError& e) {
    EXPECT_NE(std::string(e.what()).find("0.5"), std::string::npos) << e.what();
  }
}

TEST(Partition, CustomRejectsUnsortedOrWrongEndpoints) {
  EXPECT_ANY_THROW(PartitionSequence::custom(1.0, {{0.0, 1.0}, {0.0, 0.7, 0.2, 1.0}}));
  EXPECT_ANY_THROW(PartitionSequence::custom(1.0, {{0.0, 0.9}}));
}

TEST(Partition, RefinementMapLocatesParents) {
  const auto seq = PartitionSequence::shifted_binary(2.0, 4, 3.0);
  const RefinementMap map(seq);
  for (int n = 0; n < 4; ++n)
    for (std::size_t k = 0; k < seq.level(n).size(); ++k)
      EXPECT_EQ(seq.level(n + 1).points()[map(n, k)], seq.level(n).points()[k]);
}

TEST(Partition, KindNames) {
  for (auto k : {PartitionKind::dyadic, PartitionKind::shifted_binary, PartitionKind::custom})
    EXPECT_EQ(partition_kind_from_string(to_string(k)), k);
  EXPECT_EQ(to_string(PartitionKind::shifted_binary), "shifted-binary");
  EXPECT_ANY_THROW(partition_kind_from_string("triadic"));
}

// Property: every level of a generated sequence is strictly increasing, starts
// at 0, ends at T, and contains the previous level.
TEST(PartitionProperty, GeneratedSequencesAreNested) {
  for (double ratio : {1.5, 2.0, 2.5, 4.0, 7.0})
    for (double T : {0.5, 1.0, 3.0}) {
      const auto seq = PartitionSequence::shifted_binary(T, 7, ratio);
      for (int n = 0; n <= 7; ++n) {
        const auto p = seq.level(n).points();
        EXPECT_EQ(p.front(), 0.0);
        EXPECT_EQ(p.back(), T);
        EXPECT_TRUE(std::is_sorted(p.begin(), p.end()));
        EXPECT_EQ(std::adjacent_find(p.begin(), p.end()), p.end());
        EXPECT_EQ(p.size(), (std::size_t{1} << n) + 1);
      }
      EXPECT_NO_THROW(validate(seq));
    }
}
