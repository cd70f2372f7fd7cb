#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <random>

#include "semimyopic/numerics.hpp"
#include "semimyopic/oracle.hpp"
#include "semimyopic/rng.hpp"
#include "semimyopic/voi.hpp"

using namespace semimyopic;
using namespace semimyopic::oracle;

namespace {

const IndependentBeliefs kPathological{{1.0, 0.0}, {0.0, 1.0}};
const MeasurementModel kModel{5.0, 0.00144};
const UtilityFn kStep = StepUtility{};

Batch single(std::size_t n, std::size_t item, int k) {
  Batch b{std::vector<int>(n, 0)};
  b.allocation[item] = k;
  return b;
}

}  // namespace

TEST(OptimalPlan, BudgetZeroIsImmediateSelection) {
  EXPECT_EQ(optimal_plan_value(kPathological, kModel, kStep, 0), 0.5);
  EXPECT_FALSE(optimal_action(kPathological, kModel, kStep, 0).has_value());
}

TEST(OptimalPlan, NeverWorseThanSelectingNow) {
  for (int b = 0; b <= 4; ++b) EXPECT_GE(optimal_plan_value(kPathological, kModel, kStep, b), 0.5);
}

TEST(OptimalPlan, MonotoneInBudget) {
  const IndependentBeliefs items{{0.2, 1.0}, {0.0, 0.8}, {1.0, 0.0}};
  double prev = -1.0;
  for (int b = 0; b <= 3; ++b) {
    const double v = optimal_plan_value(items, {2.0, 0.001}, TanhUtility{}, b);
    EXPECT_GE(v, prev - 1e-12);
    prev = v;
  }
}

TEST(OptimalPlan, GridRefinementConverges) {
  for (int b = 1; b <= 4; ++b) {
    const double coarse = optimal_plan_value(kPathological, kModel, kStep, b, ObsGrid{9});
    const double fine = optimal_plan_value(kPathological, kModel, kStep, b, ObsGrid{17});
    EXPECT_LT(std::abs(coarse - fine), 1e-3) << "budget " << b;
  }
}

TEST(OptimalPlan, ZeroCostFinerGridNeverLosesValue) {
  const MeasurementModel free{5.0, 0.0};
  for (int b = 1; b <= 3; ++b) {
    double prev = -1.0;
    for (int nodes : {3, 5, 9, 17, 33}) {
      const double v = optimal_plan_value(kPathological, free, kStep, b, ObsGrid{nodes});
      EXPECT_GE(v, prev - 1e-6) << "budget " << b << " nodes " << nodes;
      prev = v;
    }
  }
}

TEST(OptimalPlan, SingleStepApproachesQuadrature) {
  // With one measurement left the tree is a single expectation of a kinked
  // function, so the node value converges to the 1-D quadrature, slowly.
  const IndependentBeliefs items{{0.3, 1.0}, {0.0, 0.0}};
  const UtilityFn u = TanhUtility{};
  const double now = std::max(expected_utility(u, items[0]), expected_utility(u, items[1]));
  const double quad = intrinsic_batch_value(Beliefs(items), {1.0, 0.0}, u, single(2, 0, 1));
  const double coarse = optimal_plan_value(items, {1.0, 0.0}, u, 1, ObsGrid{5}) - now;
  const double fine = optimal_plan_value(items, {1.0, 0.0}, u, 1, ObsGrid{129}) - now;
  EXPECT_NEAR(fine, quad, 1e-3);
  EXPECT_LT(std::abs(fine - quad), std::abs(coarse - quad));
}

TEST(OptimalPlan, Guards) {
  EXPECT_THROW(optimal_plan_value(IndependentBeliefs(4, GaussianBelief{}), kModel, kStep, 1), Intractable);
  EXPECT_THROW(optimal_plan_value(kPathological, kModel, kStep, 5), Intractable);
  EXPECT_THROW(optimal_plan_value(kPathological, kModel, kStep, 1, ObsGrid{4}), std::invalid_argument);
  EXPECT_THROW(optimal_plan_value(kPathological, kModel, kStep, 1, ObsGrid{1}), std::invalid_argument);
}

TEST(OptimalPlan, GaussHermiteWeightsSumToOne) {
  for (int nodes : {3, 9, 17, 33}) {
    const auto& rule = numerics::gauss_hermite(nodes);
    double sum = 0.0;
    for (double w : rule.weights) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(rule.nodes[static_cast<std::size_t>(nodes / 2)], 0.0, 1e-14);
  }
}

TEST(Rollout, AgreesWithPlanValue) {
  const IndependentBeliefs items{{0.3, 1.0}, {1.0, 0.0}};
  const MeasurementModel m{2.0, 0.005};
  const double planned = optimal_plan_value(items, m, kStep, 3);
  const auto mc = rollout_optimal_policy(items, m, kStep, 3, {}, 100'000, 42, RolloutModel::kDiscretized);
  EXPECT_LE(std::abs(mc.estimate - planned), 3.0 * mc.std_error) << planned << " vs " << mc.estimate;
}

TEST(Rollout, ContinuousWorldNeverBeatsSelectingBlindlyByMoreThanPlanned) {
  // The planned value is an upper estimate of what the discretized policy
  // earns with continuous observations, up to discretization error.
  const IndependentBeliefs items{{0.3, 1.0}, {1.0, 0.0}};
  const MeasurementModel m{2.0, 0.005};
  const double planned = optimal_plan_value(items, m, kStep, 2, ObsGrid{33});
  const auto mc = rollout_optimal_policy(items, m, kStep, 2, ObsGrid{33}, 20'000, 7);
  EXPECT_LE(mc.estimate, planned + 3.0 * mc.std_error + 2e-3);
  EXPECT_GE(mc.estimate, 0.5 - 3.0 * mc.std_error);
}

TEST(TerminationBound, PathologicalBudgetThree) {
  const auto report = check_theorem1(kPathological, kModel, kStep, 3, {}, 100, 7);
  EXPECT_TRUE(report.holds);
  EXPECT_EQ(report.paths.size(), 100u);
  for (const auto& p : report.paths) EXPECT_LE(p.optimal_voi, p.bound + 1e-6);
}

TEST(TerminationBound, ProhibitiveCostMeansNoMeasurement) {
  const MeasurementModel pricey{5.0, 2.0};
  const auto report = check_theorem1(kPathological, pricey, kStep, 3, {}, 10, 1);
  EXPECT_TRUE(report.holds);
  for (const auto& p : report.paths) EXPECT_EQ(p.remaining_budget, 3);
}

TEST(TerminationBound, NoBudgetLeftMeansNoValue) {
  const auto report = check_theorem1(kPathological, {5.0, 0.0}, kStep, 2, {}, 20, 3);
  for (const auto& p : report.paths) {
    if (p.remaining_budget == 0) {
      EXPECT_LE(p.optimal_voi, 1e-6);
    }
  }
}

TEST(TerminationBound, RequiresOneKnownItem) {
  EXPECT_THROW(check_theorem1({{0.0, 1.0}, {0.0, 1.0}}, kModel, kStep, 2), std::invalid_argument);
}

TEST(GreedyFactorN, TightnessConstruction) {
  const auto k2 = check_theorem2(tightness_instance(4, 8, 2.0));
  EXPECT_DOUBLE_EQ(k2.v_optimal, 2.0);
  EXPECT_DOUBLE_EQ(k2.v_blinkered, 1.0);
  EXPECT_DOUBLE_EQ(k2.ratio, 2.0);
  EXPECT_TRUE(k2.mutually_submodular);
  const auto k64 = check_theorem2(tightness_instance(4, 8, 64.0));
  EXPECT_NEAR(k64.ratio, 4.0, 0.4);
}

TEST(GreedyFactorN, IdenticalLinearValuesAreOptimal) {
  SyntheticVoiInstance s{3, 6, {}, 0.0};
  for (int j = 0; j < 3; ++j) {
    std::vector<double> v(7);
    for (int i = 0; i <= 6; ++i) v[i] = 0.1 * i;
    s.values.push_back(v);
  }
  const auto r = check_theorem2(s);
  EXPECT_NEAR(r.ratio, 1.0, 1e-12);
}

TEST(GreedyFactorN, RejectsNonMonotoneValues) {
  SyntheticVoiInstance s{2, 2, {{0.0, 0.5, 0.4}, {0.0, 0.1, 0.2}}, 0.0};
  EXPECT_THROW(check_theorem2(s), std::invalid_argument);
  SyntheticVoiInstance z{2, 1, {{0.1, 0.5}, {0.0, 0.1}}, 0.0};
  EXPECT_THROW(check_theorem2(z), std::invalid_argument);
}

TEST(GreedyFactorN, SynergyBreaksMutualSubmodularity) {
  SyntheticVoiInstance s{2, 2, {{0.0, 0.5, 0.6}, {0.0, 0.5, 0.6}}, 1.0};
  EXPECT_FALSE(check_theorem2(s).mutually_submodular);
}

TEST(Theorem2Property, RandomAdditiveInstances) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> step(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng() % 4;
    const int m = 1 + static_cast<int>(rng() % 10);
    SyntheticVoiInstance s{n, m, {}, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
      for (int i = 1; i <= m; ++i) v[i] = v[i - 1] + step(rng) * step(rng);
      s.values.push_back(v);
    }
    const auto r = check_theorem2(s);
    EXPECT_TRUE(r.mutually_submodular);
    EXPECT_TRUE(r.bound_holds);
    EXPECT_GE(r.v_blinkered, r.v_optimal / static_cast<double>(n) - 1e-9);
  }
}

TEST(McBatchVoi, PathologicalTwoMeasurements) {
  const auto mc = mc_batch_voi(Beliefs(kPathological), kModel, kStep, single(2, 1, 2), 1'000'000, 11);
  EXPECT_LE(std::abs(mc.estimate - 0.0028830197181513144), 3.0 * mc.std_error);
}

TEST(McBatchVoi, UninformativeBatch) {
  const auto mc = mc_batch_voi(Beliefs(kPathological), {1e12, 0.0}, kStep, single(2, 1, 1), 10'000, 2);
  EXPECT_LE(std::abs(mc.estimate), 3.0 * mc.std_error + 1e-12);
}

TEST(McBatchVoi, ChainMatchesDenseJointSampler) {
  // Brute-force sampler: draw the joint (x, y) and condition densely per sample.
  const Beliefs chain(ChainBelief::random_walk(2, 0.0, 1.0, 1.0));
  const MeasurementModel m{5.0, 0.0};
  const UtilityFn u = TanhUtility{};
  const Batch batch = single(2, 1, 1);
  const auto mc = mc_batch_voi(chain, m, u, batch, 200'000, 5);

  Eigen::Matrix2d cov;
  cov << 1.0, 1.0, 1.0, 2.0;
  const Eigen::Matrix2d lower = cov.llt().matrixL();
  auto engine = make_engine(77);
  std::normal_distribution<double> z;
  const double now = std::max(expected_utility(u, {0.0, 1.0}), expected_utility(u, {0.0, 2.0}));
  const double s = cov(1, 1) + m.noise_variance;
  const Eigen::Vector2d gain = cov.col(1) / s;
  const Eigen::Matrix2d post = cov - cov.col(1) * cov.row(1) / s;
  double sum = 0.0, sum_sq = 0.0;
  const int samples = 200'000;
  for (int i = 0; i < samples; ++i) {
    const Eigen::Vector2d x = lower * Eigen::Vector2d(z(engine), z(engine));
    const double y = x(1) + std::sqrt(m.noise_variance) * z(engine);
    const Eigen::Vector2d mean = gain * y;
    const double g = std::max(expected_utility(u, {mean(0), post(0, 0)}), expected_utility(u, {mean(1), post(1, 1)})) - now;
    sum += g;
    sum_sq += g * g;
  }
  const double dense = sum / samples;
  const double dense_se = std::sqrt((sum_sq / samples - dense * dense) / samples);
  EXPECT_LE(std::abs(mc.estimate - dense), 3.0 * std::hypot(mc.std_error, dense_se));
  const double quad = intrinsic_batch_value(chain, m, u, batch);
  EXPECT_LE(std::abs(mc.estimate - quad), 3.0 * mc.std_error);
}

TEST(McBatchVoi, DeterministicAndGuarded) {
  const auto a = mc_batch_voi(Beliefs(kPathological), kModel, kStep, single(2, 1, 3), 5000, 9);
  const auto b = mc_batch_voi(Beliefs(kPathological), kModel, kStep, single(2, 1, 3), 5000, 9);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_THROW(mc_batch_voi(Beliefs(kPathological), kModel, kStep, single(2, 1, 3), 999, 9), std::invalid_argument);
}

TEST(McBatchVoiProperty, MultiItemBatchesAgreeWithValuator) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> mean(-0.5, 1.5), var(0.3, 1.5);
  for (int t = 0; t < 10; ++t) {
    const Beliefs b(IndependentBeliefs{{mean(rng), var(rng)}, {mean(rng), var(rng)}, {mean(rng), var(rng)}});
    const Batch batch{{1 + t % 2, 0, 2}};
    EstimatorSettings s;
    s.mc_samples = 200'000;
    s.seed = static_cast<std::uint64_t>(t);
    const double est = intrinsic_batch_value(b, {2.0, 0.0}, kStep, batch, s);
    const auto mc = mc_batch_voi(b, {2.0, 0.0}, kStep, batch, 200'000, 1000 + t);
    // Both sides are Monte Carlo with comparable spread.
    EXPECT_LE(std::abs(est - mc.estimate), 3.0 * std::sqrt(2.0) * mc.std_error + 1e-12);
  }
}
