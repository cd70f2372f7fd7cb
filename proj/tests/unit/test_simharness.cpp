#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "semimyopic/simharness.hpp"

using namespace semimyopic;

namespace {

InstanceSpec table_spec(std::size_t n) {
  InstanceSpec spec;
  spec.n = n;
  spec.known_item = KnownItem{0, 1.0};
  spec.utility = StepUtility{};
  return spec;
}

GridSpec small_grid(std::vector<ConstraintFamily> schemes, int budget, int replicates) {
  GridSpec g;
  g.sigma_o2 = {3.0, 5.0};
  g.costs = {0.0005, 0.002};
  g.budget = budget;
  g.replicates = replicates;
  g.schemes = std::move(schemes);
  g.master_seed = 2024;
  return g;
}

std::string csv(const GridResult& r) {
  std::ostringstream out;
  write_episode_csv(out, r.episodes);
  write_summary_csv(out, r.cells);
  return out.str();
}

}  // namespace

TEST(GenerateInstance, KnownItem) {
  const auto inst = generate_instance(table_spec(2), 5);
  EXPECT_EQ(inst.true_values[0], 1.0);
  EXPECT_TRUE(inst.prior.known(0));
  EXPECT_FALSE(inst.prior.known(1));
  EXPECT_EQ(inst.prior.marginals()[1].variance, 1.0);
}

TEST(GenerateInstance, TinyPriorVariance) {
  InstanceSpec spec;
  spec.n = 4;
  spec.prior_mean = 0.7;
  spec.prior_variance = 1e-12;
  const auto inst = generate_instance(spec, 9);
  for (double x : inst.true_values) EXPECT_NEAR(x, 0.7, 1e-4);
}

TEST(GenerateInstance, ChainPriorStructure) {
  InstanceSpec spec;
  spec.n = 2;
  spec.dependency = DependencyKind::kChain;
  spec.chain_form = ChainForm::kRandomWalk;
  spec.drift_variance = 1.0;
  const auto inst = generate_instance(spec, 1);
  ASSERT_TRUE(inst.prior.is_chain());
  EXPECT_NEAR(inst.prior.marginals()[0].variance, 1.0, 1e-12);
  EXPECT_NEAR(inst.prior.marginals()[1].variance, 2.0, 1e-12);
}

TEST(GenerateInstance, ChainSamplesFollowCovariance) {
  InstanceSpec spec;
  spec.n = 3;
  spec.dependency = DependencyKind::kChain;
  spec.drift_variance = 0.5;
  const auto cov = prior_beliefs(spec).covariance();
  double s01 = 0.0, s11 = 0.0;
  const int draws = 40'000;
  for (int i = 0; i < draws; ++i) {
    const auto x = generate_instance(spec, static_cast<std::uint64_t>(i)).true_values;
    s01 += x[0] * x[1];
    s11 += x[1] * x[1];
  }
  EXPECT_NEAR(s01 / draws, cov[1], 0.03);
  EXPECT_NEAR(s11 / draws, cov[4], 0.03);
}

TEST(GenerateInstance, DeterministicAndValidated) {
  const auto a = generate_instance(table_spec(4), 77);
  const auto b = generate_instance(table_spec(4), 77);
  EXPECT_EQ(a.true_values, b.true_values);
  InstanceSpec bad = table_spec(2);
  bad.dependency = DependencyKind::kChain;
  EXPECT_THROW(generate_instance(bad, 1), std::invalid_argument);
  bad = table_spec(2);
  bad.prior_variance = 0.0;
  EXPECT_THROW(generate_instance(bad, 1), std::invalid_argument);
}

TEST(RunGrid, BudgetOneMyopicEqualsBlinkered) {
  const auto r = run_grid(small_grid({ConstraintFamily::kMyopic, ConstraintFamily::kBlinkered}, 1, 10), table_spec(3));
  for (const auto& c : r.cells) {
    ASSERT_EQ(c.pairs.size(), 1u);
    EXPECT_EQ(c.pairs[0].mean_diff, 0.0);
    EXPECT_EQ(c.pairs[0].std_diff, 0.0);
  }
}

TEST(RunGrid, SingleReplicateSingleCell) {
  GridSpec g = small_grid({ConstraintFamily::kMyopic, ConstraintFamily::kBlinkered}, 1, 1);
  g.sigma_o2 = {5.0};
  g.costs = {0.001};
  const auto r = run_grid(g, table_spec(2));
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_EQ(r.cells[0].pairs[0].mean_diff, 0.0);
  EXPECT_EQ(r.episodes.size(), 2u);
}

TEST(RunGrid, PairedDesignSharesInstancesAndNoise) {
  const auto r = run_grid(small_grid({ConstraintFamily::kBlinkered, ConstraintFamily::kOmniMyopic}, 4, 5), table_spec(3));
  for (std::size_t i = 0; i + 1 < r.episodes.size(); i += 2) {
    const auto& a = r.episodes[i];
    const auto& b = r.episodes[i + 1];
    EXPECT_EQ(a.cell, b.cell);
    EXPECT_EQ(a.replicate, b.replicate);
    EXPECT_EQ(a.result.seed, b.result.seed);
    EXPECT_EQ(a.result.best, b.result.best);
  }
}

TEST(RunGrid, IdenticalObservationsForIdenticalMeasurements) {
  GridSpec g = small_grid({ConstraintFamily::kBlinkered, ConstraintFamily::kMyopic}, 5, 20);
  g.costs = {0.0};
  const auto r = run_grid(g, table_spec(2));
  int compared = 0;
  for (std::size_t i = 0; i + 1 < r.episodes.size(); i += 2) {
    const auto& a = r.episodes[i].result.trace;
    const auto& b = r.episodes[i + 1].result.trace;
    std::map<std::pair<std::size_t, int>, double> seen;
    std::map<std::size_t, int> count;
    for (const auto& e : a) seen[{e.item, count[e.item]++}] = e.observation;
    count.clear();
    for (const auto& e : b) {
      const auto key = std::make_pair(e.item, count[e.item]++);
      if (seen.count(key)) {
        EXPECT_EQ(seen[key], e.observation);
        ++compared;
      }
    }
  }
  EXPECT_GT(compared, 0);
}

TEST(RunGrid, RegretNonNegativeAndMeansConsistent) {
  const auto r = run_grid(small_grid({ConstraintFamily::kMyopic, ConstraintFamily::kBlinkered,
                                      ConstraintFamily::kOmniMyopic}, 5, 8), table_spec(3));
  for (const auto& e : r.episodes) EXPECT_GE(e.result.regret, 0.0);
  for (const auto& c : r.cells) {
    ASSERT_EQ(c.pairs.size(), 3u);
    EXPECT_EQ(c.pairs[0].mean_diff, c.mean_regret[0] - c.mean_regret[1]);
    EXPECT_EQ(c.pairs[1].mean_diff, c.mean_regret[0] - c.mean_regret[2]);
    EXPECT_EQ(c.pairs[2].mean_diff, c.mean_regret[1] - c.mean_regret[2]);
    EXPECT_EQ(c.replicates, 8);
  }
}

TEST(RunGrid, DeterministicAcrossThreadCounts) {
  GridSpec g = small_grid({ConstraintFamily::kMyopic, ConstraintFamily::kBlinkered}, 5, 6);
  g.threads = 1;
  const auto one = csv(run_grid(g, table_spec(3)));
  g.threads = 4;
  const auto four = csv(run_grid(g, table_spec(3)));
  EXPECT_EQ(one, four);
}

TEST(RunGrid, EnumerationGuardRecordedPerCell) {
  GridSpec g = small_grid({ConstraintFamily::kBlinkered, ConstraintFamily::kExhaustive}, 6, 2);
  g.estimator.enumeration_limit = 10;
  const auto r = run_grid(g, table_spec(4));
  for (const auto& c : r.cells) {
    ASSERT_TRUE(c.error.has_value());
    EXPECT_NE(c.error->find("exceeds"), std::string::npos);
  }
  std::ostringstream out;
  write_summary_csv(out, r.cells);
  EXPECT_EQ(out.str(), "scheme_pair,sigma_o2,cost,mean_diff,std_diff,n_replicates\n");
}

TEST(Csv, Schemas) {
  GridSpec g = small_grid({ConstraintFamily::kMyopic}, 2, 1);
  const auto r = run_grid(g, table_spec(2));
  std::ostringstream e, s;
  write_episode_csv(e, r.episodes);
  write_summary_csv(s, r.cells);
  EXPECT_EQ(e.str().substr(0, e.str().find('\n')),
            "scheme,n,budget,sigma_o2,cost,replicate,seed,selected,best,net_utility,regret,measurements");
  std::size_t rows = 0;
  for (char c : e.str()) rows += c == '\n';
  EXPECT_EQ(rows, 1u + 4u);
  EXPECT_EQ(s.str(), "scheme_pair,sigma_o2,cost,mean_diff,std_diff,n_replicates\n");
}

TEST(DependencySweep, SmallRun) {
  InstanceSpec spec;
  spec.n = 3;
  spec.dependency = DependencyKind::kChain;
  SweepSpec sweep;
  sweep.ratios = {0.0, 1.0};
  sweep.replicates = 3;
  sweep.budget = 3;
  const auto r = dependency_sweep(spec, sweep);
  ASSERT_EQ(r.points.size(), 2u);
  EXPECT_EQ(r.points[0].drift_variance, kIndependentDriftVariance);
  EXPECT_DOUBLE_EQ(r.points[1].drift_variance, 4.0);
  for (const auto& p : r.points) {
    EXPECT_DOUBLE_EQ(p.utility_difference, p.stats.mean_regret[1] - p.stats.mean_regret[0]);
  }
  std::ostringstream out;
  write_sweep_csv(out, r.points);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "ratio,drift_variance,mean_regret_blinkered,mean_regret_omni_myopic,utility_difference,std_diff,"
            "n_replicates");
  EXPECT_THROW(dependency_sweep(InstanceSpec{}, sweep), std::invalid_argument);
}
