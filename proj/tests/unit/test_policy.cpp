#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "semimyopic/policy.hpp"
#include "semimyopic/rng.hpp"

using namespace semimyopic;

namespace {

const MeasurementModel kModel{5.0, 0.00144};
const UtilityFn kStep = StepUtility{};

Instance pathological(double truth) { return {{1.0, truth}, Beliefs(IndependentBeliefs{{1.0, 0.0}, {0.0, 1.0}})}; }

ControllerState fresh(const Beliefs& b, int budget) { return {b, budget, 0.0, {}}; }

}  // namespace

TEST(Decide, MyopicSelectsKnownItem) {
  const auto d = decide(fresh(pathological(0.0).prior, 5), ConstraintFamily::kMyopic, kModel, kStep,
                        ExecutionMode::kSingleStep, {});
  ASSERT_TRUE(std::holds_alternative<Select>(d.action));
  EXPECT_EQ(std::get<Select>(d.action).item, 0u);
  EXPECT_FALSE(d.batch.has_value());
}

TEST(Decide, BlinkeredMeasuresUnknownItem) {
  const auto d = decide(fresh(pathological(0.0).prior, 5), ConstraintFamily::kBlinkered, kModel, kStep,
                        ExecutionMode::kSingleStep, {});
  ASSERT_TRUE(std::holds_alternative<Measure>(d.action));
  EXPECT_EQ(std::get<Measure>(d.action).item, 1u);
  ASSERT_TRUE(d.batch.has_value());
  EXPECT_GT(d.batch->net, 0.0);
}

TEST(Decide, ExhaustedBudgetSelects) {
  for (auto f : {ConstraintFamily::kMyopic, ConstraintFamily::kBlinkered, ConstraintFamily::kExhaustive}) {
    const auto d = decide(fresh(pathological(0.0).prior, 0), f, kModel, kStep, ExecutionMode::kSingleStep, {});
    ASSERT_TRUE(std::holds_alternative<Select>(d.action));
    EXPECT_EQ(std::get<Select>(d.action).item, 0u);
  }
}

TEST(Decide, SelectionTieGoesToLowerIndex) {
  const Beliefs twins(IndependentBeliefs{{0.0, 1.0}, {0.0, 1.0}});
  EXPECT_EQ(best_expected_item(twins, kStep), 0u);
}

TEST(RunEpisode, MyopicPathological) {
  const auto r = run_episode(pathological(0.3), ConstraintFamily::kMyopic, kModel, kStep,
                             ExecutionMode::kSingleStep, 5, ObservationStream(1));
  EXPECT_EQ(r.measurements, 0);
  EXPECT_EQ(r.selected, 0u);
  EXPECT_EQ(r.net_utility, 0.5);
  EXPECT_EQ(r.regret, 0.0);
}

TEST(RunEpisode, BlinkeredPathologicalMeasures) {
  const auto r = run_episode(pathological(2.0), ConstraintFamily::kBlinkered, kModel, kStep,
                             ExecutionMode::kSingleStep, 5, ObservationStream(1));
  EXPECT_GE(r.measurements, 1);
  EXPECT_EQ(r.trace.front().item, 1u);
}

TEST(RunEpisode, BudgetZero) {
  const Instance inst{{0.2, 1.5, -0.4}, Beliefs(IndependentBeliefs{{0.0, 1.0}, {-0.5, 1.0}, {0.5, 1.0}})};
  const auto r = run_episode(inst, ConstraintFamily::kBlinkered, kModel, kStep, ExecutionMode::kSingleStep, 0,
                             ObservationStream(3));
  EXPECT_EQ(r.selected, 2u);
  EXPECT_EQ(r.net_utility, 0.0);
  EXPECT_EQ(r.regret, 1.0);
  EXPECT_EQ(r.best, 1u);
}

TEST(RunEpisode, DeterministicGivenStream) {
  const Instance inst{{0.2, 1.5, -0.4}, Beliefs(IndependentBeliefs{{0.0, 1.0}, {-0.5, 1.0}, {0.5, 1.0}})};
  EstimatorSettings s;
  s.seed = 5;
  for (auto f : {ConstraintFamily::kBlinkered, ConstraintFamily::kOmniMyopic}) {
    const auto a = run_episode(inst, f, {2.0, 0.001}, kStep, ExecutionMode::kSingleStep, 6, ObservationStream(8), s);
    const auto b = run_episode(inst, f, {2.0, 0.001}, kStep, ExecutionMode::kSingleStep, 6, ObservationStream(8), s);
    EXPECT_EQ(a.selected, b.selected);
    EXPECT_EQ(a.net_utility, b.net_utility);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      EXPECT_EQ(a.trace[i].observation, b.trace[i].observation);
      EXPECT_EQ(a.trace[i].net_voi, b.trace[i].net_voi);
    }
  }
}

TEST(RunEpisode, WholeBatchExecutesBatch) {
  const auto r = run_episode(pathological(1.4), ConstraintFamily::kBlinkered, kModel, kStep,
                             ExecutionMode::kWholeBatch, 5, ObservationStream(4));
  ASSERT_GE(r.measurements, 3);
  EXPECT_LE(r.measurements, 5);
  // The first batch is executed in full before deliberating again.
  EXPECT_EQ(r.trace[0].step, r.trace[1].step);
  EXPECT_EQ(r.trace[1].step, r.trace[2].step);
}

TEST(RunEpisode, RejectsMismatchedInstance) {
  const Instance bad{{1.0}, Beliefs(IndependentBeliefs{{1.0, 0.0}, {0.0, 1.0}})};
  EXPECT_THROW(run_episode(bad, ConstraintFamily::kMyopic, kModel, kStep, ExecutionMode::kSingleStep, 2,
                           ObservationStream(0)),
               std::invalid_argument);
}

TEST(PolicyProperty, AccountingTerminationAndRegret) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> noise(0.5, 6.0), cost(0.0, 0.01);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 3);
    IndependentBeliefs prior(n, GaussianBelief{0.0, 1.0});
    std::vector<double> truth(n);
    for (auto& x : truth) x = z(rng);
    const Instance inst{truth, Beliefs(prior)};
    const MeasurementModel m{noise(rng), cost(rng)};
    const int budget = 1 + t % 6;
    for (auto f : {ConstraintFamily::kMyopic, ConstraintFamily::kBlinkered, ConstraintFamily::kOmniMyopic}) {
      for (auto mode : {ExecutionMode::kSingleStep, ExecutionMode::kWholeBatch}) {
        const auto r = run_episode(inst, f, m, kStep, mode, budget, ObservationStream(static_cast<std::uint64_t>(t)));
        EXPECT_LE(r.measurements, budget);
        EXPECT_EQ(r.measurements, static_cast<int>(r.trace.size()));
        EXPECT_EQ(r.spent_cost, m.cost * static_cast<double>(r.trace.size()));
        EXPECT_GE(r.regret, 0.0);
        EXPECT_DOUBLE_EQ(r.net_utility, kStep(truth[r.selected]) - r.spent_cost);
        for (const auto& e : r.trace) EXPECT_GT(e.net_voi, kPositiveVoiThreshold);
      }
    }
  }
}

TEST(PolicyProperty, MyopicEqualsBlinkeredAtBudgetOne) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> z;
  for (int t = 0; t < 30; ++t) {
    const Instance inst{{1.0, z(rng), z(rng)}, Beliefs(IndependentBeliefs{{1.0, 0.0}, {0.0, 1.0}, {0.3, 0.5}})};
    const MeasurementModel m{0.5 + t * 0.1, 0.0005 * (t % 4)};
    const ObservationStream stream(static_cast<std::uint64_t>(100 + t));
    const auto a = run_episode(inst, ConstraintFamily::kMyopic, m, kStep, ExecutionMode::kSingleStep, 1, stream);
    const auto b = run_episode(inst, ConstraintFamily::kBlinkered, m, kStep, ExecutionMode::kSingleStep, 1, stream);
    EXPECT_EQ(a.selected, b.selected);
    EXPECT_EQ(a.net_utility, b.net_utility);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      EXPECT_EQ(a.trace[i].item, b.trace[i].item);
      EXPECT_EQ(a.trace[i].observation, b.trace[i].observation);
    }
  }
}

TEST(PolicyProperty, FreeMeasurementsAreUsedWhileInformative) {
  // With zero cost every informative measurement has positive value, so the
  // budget is exhausted before selection.
  const Instance inst{{0.1, 0.9, -0.2}, Beliefs(IndependentBeliefs{{0.0, 1.0}, {0.5, 1.0}, {0.8, 1.0}})};
  for (auto f : {ConstraintFamily::kMyopic, ConstraintFamily::kBlinkered}) {
    const auto r = run_episode(inst, f, {1.0, 0.0}, TanhUtility{}, ExecutionMode::kSingleStep, 6, ObservationStream(2));
    EXPECT_EQ(r.measurements, 6);
  }
}

TEST(WriteTrace, OneLinePerMeasurement) {
  const auto r = run_episode(pathological(2.0), ConstraintFamily::kBlinkered, kModel, kStep,
                             ExecutionMode::kSingleStep, 5, ObservationStream(1));
  std::ostringstream out;
  write_trace(out, r.trace);
  std::size_t lines = 0;
  for (char c : out.str()) lines += c == '\n';
  EXPECT_EQ(lines, r.trace.size());
}

TEST(ExecutionMode, NamesRoundTrip) {
  for (auto m : {ExecutionMode::kSingleStep, ExecutionMode::kWholeBatch}) EXPECT_EQ(parse_execution_mode(to_string(m)), m);
  EXPECT_THROW(parse_execution_mode("sometimes"), std::invalid_argument);
}
