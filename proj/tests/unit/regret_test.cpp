#include <gtest/gtest.h>

#include <cmath>

#include "ate/designs.hpp"
#include "ate/regret.hpp"
#include "test_support.hpp"

namespace ate::evaluation {
namespace {

std::vector<PotentialOutcomePair> constant(std::size_t n, double y1, double y0) {
  return std::vector<PotentialOutcomePair>(n, PotentialOutcomePair{y1, y0});
}

TEST(NeymanObjective, Examples) {
  EXPECT_DOUBLE_EQ(neyman_objective(1, 1, 0.5), 4.0);
  EXPECT_DOUBLE_EQ(neyman_objective(2, 1, 0.25), 16.0 + 4.0 / 3.0);
  EXPECT_EQ(neyman_objective(0, 0, 0.3), 0.0);
  EXPECT_THROW(neyman_objective(1, 1, 0.0), DomainError);
}

TEST(OptimalPropensity, Examples) {
  EXPECT_DOUBLE_EQ(optimal_propensity(constant(5, 2, 1)).p, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(optimal_propensity(constant(5, 2, 1)).value, 5.0 * 9.0);
  EXPECT_DOUBLE_EQ(optimal_propensity(constant(3, 1.5, -1.5)).p, 0.5);
  EXPECT_DOUBLE_EQ(optimal_propensity(constant(4, 1, 3)).p, 0.25);
  EXPECT_THROW(optimal_propensity(constant(3, 0, 0)), DomainError);
}

TEST(OptimalPropensity, DegenerateArmSitsOnBoundary) {
  const auto treated_only = optimal_propensity(constant(3, 2, 0));
  EXPECT_TRUE(treated_only.degenerate);
  EXPECT_EQ(treated_only.p, 1.0);
  EXPECT_DOUBLE_EQ(treated_only.value, 12.0);
  const auto control_only = optimal_propensity(constant(3, 0, 1));
  EXPECT_TRUE(control_only.degenerate);
  EXPECT_EQ(control_only.p, 0.0);
}

TEST(OptimalPropensityGrid, Examples) {
  EXPECT_NEAR(optimal_propensity_grid(constant(2, 2, 1), 1e-4), 2.0 / 3.0, 1e-4);
  EXPECT_EQ(optimal_propensity_grid(constant(2, 1, 1), 1e-4), 0.5);
}

TEST(OptimalPropensity, ClosedFormMatchesGridOracle) {
  testing::Gen gen(83);
  for (int i = 0; i < 100; ++i) {
    std::vector<PotentialOutcomePair> units(static_cast<std::size_t>(gen.integer(1, 30)));
    for (auto& u : units) u = {gen.uniform(-4, 4), gen.uniform(-4, 4)};
    EXPECT_NEAR(optimal_propensity(units).p, optimal_propensity_grid(units, 1e-4), 1e-4);
  }
}

TEST(OptimalPropensity, BoundedOutcomesKeepOptimumInterior) {
  testing::Gen gen(89);
  int checked = 0;
  while (checked < 300) {
    const double c = gen.uniform(0.1, 1.0);
    const double C = gen.uniform(c, 5.0);
    std::vector<PotentialOutcomePair> units(static_cast<std::size_t>(gen.integer(1, 40)));
    for (auto& u : units) u = {gen.uniform(-C, C), gen.uniform(-C, C)};
    if (!verify_bounds(OutcomeSequence(units), {c, C})) continue;
    const double A = 1.0 + C / c;
    const double p = optimal_propensity(units).p;
    ASSERT_GE(p, 1.0 / A);
    ASSERT_LE(p, 1.0 - 1.0 / A);
    ++checked;
  }
}

TEST(OptimalPropensity, SuperpopulationLimit) {
  Rng rng(5);
  std::vector<PotentialOutcomePair> units(200000);
  for (auto& u : units) u = {rng.normal(2.0, 1.0), rng.normal(1.0, 1.0)};
  const double expected = std::sqrt(5.0) / (std::sqrt(5.0) + std::sqrt(2.0));
  EXPECT_NEAR(optimal_propensity(units).p, expected, 2e-3);
  EXPECT_NEAR(optimal_propensity_grid(units, 1e-3), expected, 3e-3);
}

TEST(OptimalPropensity, PrefixComparatorLossNondecreasing) {
  testing::Gen gen(97);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PotentialOutcomePair> units(100);
    for (auto& u : units) u = {gen.uniform(-3, 3), gen.uniform(-3, 3)};
    double prev = 0.0;
    for (std::size_t n = 1; n <= units.size(); ++n) {
      const double v = optimal_propensity(std::span(units).first(n)).value;
      ASSERT_GE(v, prev * (1 - 1e-12));
      prev = v;
    }
  }
}

TEST(NeymanRegret, FixedOptimumHasZeroRegret) {
  OutcomeSequence seq(constant(50, 2, 1));
  auto d = fixed_design(2.0 / 3.0);
  Rng rng(1);
  const RegretCurve curve = neyman_regret(run_design(*d, seq, rng), seq);
  ASSERT_EQ(curve.values.size(), 50u);
  for (double v : curve.values) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(NeymanRegret, FixedHalfSingleRound) {
  OutcomeSequence seq(constant(1, 2, 1));
  auto d = fixed_design(0.5);
  Rng rng(1);
  EXPECT_NEAR(neyman_regret(run_design(*d, seq, rng), seq).final(), 1.0, 1e-12);
}

TEST(NeymanRegret, FixedDesignsNeverNegative) {
  testing::Gen gen(101);
  for (int trial = 0; trial < 50; ++trial) {
    const OutcomeSequence seq = gen.outcomes(200);
    auto d = fixed_design(gen.uniform(0.05, 0.95));
    Rng rng(static_cast<std::uint64_t>(trial));
    for (double v : neyman_regret(run_design(*d, seq, rng), seq).values) ASSERT_GE(v, -1e-9);
  }
}

TEST(NeymanRegret, MisalignedInputsRejected) {
  OutcomeSequence seq(constant(3, 2, 1));
  auto d = fixed_design(0.5);
  Rng rng(1);
  const Trajectory traj = run_design(*d, seq.prefix(2), rng);
  EXPECT_THROW(neyman_regret(traj, seq), ConfigError);
}

TEST(GroupRegret, SingleGroupEqualsNeymanRegret) {
  testing::Gen gen(103);
  const OutcomeSequence seq = gen.outcomes(300);
  auto d = clip_ogd_sc(1.0);
  Rng rng(4);
  const Trajectory traj = run_design(*d, seq, rng);
  MembershipMatrix all(seq.size(), 1);
  std::fill(all.cells.begin(), all.cells.end(), 1);
  const GroupRegret gr = group_regret(traj, seq, all);
  const RegretCurve full = neyman_regret(traj, seq);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    ASSERT_EQ(gr.groups[0].values[t], full.values[t]);
    ASSERT_EQ(gr.multigroup[t], full.values[t]);
    ASSERT_EQ(gr.groups[0].counts[t], static_cast<std::int64_t>(t + 1));
  }
}

TEST(GroupRegret, DisjointGroupsAtOneGroupsOptimum) {
  // Group 1: constant (1,3), optimum 0.25. Group 2: constant (3,1), optimum 0.75.
  OutcomeSequence seq({{1, 3}, {3, 1}, {1, 3}, {3, 1}});
  MembershipMatrix m(4, 3);
  for (std::size_t t = 0; t < 4; ++t) {
    m.at(t, 0) = t % 2 == 0;
    m.at(t, 1) = t % 2 == 1;
  }
  auto d = fixed_design(0.25);
  Rng rng(1);
  const GroupRegret gr = group_regret(run_design(*d, seq, rng), seq, m);
  EXPECT_NEAR(gr.groups[0].values.back(), 0.0, 1e-12);
  // f(0.25) - f(0.75) on (3,1) per unit: (36 + 4/3) - (12 + 4) = 64/3.
  EXPECT_NEAR(gr.groups[1].values.back(), 2 * 64.0 / 3.0, 1e-9);
  EXPECT_EQ(gr.groups[2].values, std::vector<double>(4, 0.0));
  EXPECT_EQ(gr.groups[2].counts, std::vector<std::int64_t>(4, 0));
  EXPECT_NEAR(gr.multigroup.back(), 2 * 64.0 / 3.0, 1e-9);
}

}  // namespace
}  // namespace ate::evaluation
