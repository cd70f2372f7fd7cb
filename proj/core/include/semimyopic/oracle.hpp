#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semimyopic/belief.hpp"
#include "semimyopic/utility.hpp"
#include "semimyopic/voi.hpp"

namespace semimyopic::oracle {

/// Thrown when an exact computation is requested above its tractability guard.
class Intractable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discretization of each observation by Gauss-Hermite nodes of its
/// predictive distribution.
struct ObsGrid {
  int nodes = 9;
};

inline constexpr std::size_t kMaxPlanItems = 3;
inline constexpr int kMaxPlanBudget = 4;

/// Expected net value (final expected utility less future measurement costs)
/// of the optimal adaptive measure-or-select policy with `budget` measurements
/// left, by backward induction over the discretized observation tree.
double optimal_plan_value(const IndependentBeliefs& beliefs, const MeasurementModel& model,
                          const UtilityFn& utility, int budget, const ObsGrid& grid = {});

/// First action of that policy: the item to measure, or nullopt to select now.
std::optional<std::size_t> optimal_action(const IndependentBeliefs& beliefs,
                                          const MeasurementModel& model, const UtilityFn& utility,
                                          int budget, const ObsGrid& grid = {});

struct MonteCarloValue {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Where rollout observations come from.
enum class RolloutModel {
  /// True values drawn from the prior, continuous Gaussian noise; realized
  /// utility of the selected item's true value.
  kContinuous,
  /// Observations drawn from the same Gauss-Hermite predictive nodes the
  /// planner uses; realized value is the selected item's expected utility.
  /// Its mean is exactly the planned value.
  kDiscretized,
};

/// Monte-Carlo net value of following the discretized-optimal policy.
MonteCarloValue rollout_optimal_policy(const IndependentBeliefs& beliefs,
                                       const MeasurementModel& model, const UtilityFn& utility,
                                       int budget, const ObsGrid& grid, std::size_t episodes,
                                       std::uint64_t seed,
                                       RolloutModel sampling = RolloutModel::kContinuous);

struct Theorem1Path {
  int remaining_budget = 0;
  double optimal_voi = 0.0;  // optimal plan value minus immediate selection value
  double bound = 0.0;        // remaining_budget * cost
  double margin = 0.0;       // bound - optimal_voi
  bool holds = true;
};

struct Theorem1Report {
  std::vector<Theorem1Path> paths;
  double min_margin = 0.0;
  bool holds = true;
};

/// Runs the blinkered controller on sampled paths of a two-item instance with
/// one exactly known item and checks, at each termination state, that the
/// optimal remaining value of information is at most remaining budget times cost.
Theorem1Report check_theorem1(const IndependentBeliefs& beliefs, const MeasurementModel& model,
                              const UtilityFn& utility, int budget, const ObsGrid& grid = {},
                              std::size_t paths = 100, std::uint64_t seed = 0,
                              const EstimatorSettings& settings = {});

/// Tabulated value-of-information functions: values[j][i] is the value of i
/// measurements of item j, i = 0..m. The joint value is their sum plus
/// `synergy` times the sum over item pairs of the product of their values
/// (synergy > 0 breaks mutual submodularity).
struct SyntheticVoiInstance {
  std::size_t n = 0;
  int m = 0;
  std::vector<std::vector<double>> values;
  double synergy = 0.0;

  double joint_value(const std::vector<int>& allocation) const;
};

/// v_1(i) = (i/m)^(1/k); other items jump to (1/n)^(1/k) at i >= m/n.
SyntheticVoiInstance tightness_instance(std::size_t n, int m, double k);

struct Theorem2Report {
  double v_optimal = 0.0;
  double v_blinkered = 0.0;           // greedy batch, executed in full
  double v_blinkered_stepwise = 0.0;  // greedy batch, one measurement then re-deliberate
  double ratio = 1.0;                 // v_optimal / v_blinkered
  bool mutually_submodular = true;
  bool bound_holds = true;  // v_blinkered >= v_optimal / n whenever submodular
};

Theorem2Report check_theorem2(const SyntheticVoiInstance& synth);

/// Intrinsic value of a batch by sampling posterior means from their joint
/// preposterior distribution (dense covariance algebra, independent of the
/// estimators in voi).
MonteCarloValue mc_batch_voi(const Beliefs& beliefs, const MeasurementModel& model,
                             const UtilityFn& utility, const Batch& batch, std::size_t samples,
                             std::uint64_t seed);

}  // namespace semimyopic::oracle
