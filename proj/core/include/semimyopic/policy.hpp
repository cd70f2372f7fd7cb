#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>
#include <variant>
#include <vector>

#include "semimyopic/belief.hpp"
#include "semimyopic/rng.hpp"
#include "semimyopic/utility.hpp"
#include "semimyopic/voi.hpp"

namespace semimyopic {

/// How a chosen batch is executed before deliberating again.
enum class ExecutionMode {
  kSingleStep,  // perform the single most valuable measurement of the batch
  kWholeBatch,  // perform every measurement of the batch
};

std::string_view to_string(ExecutionMode mode);
ExecutionMode parse_execution_mode(std::string_view name);

/// Net values at or below this are treated as "not worth measuring".
inline constexpr double kPositiveVoiThreshold = 1e-12;

struct Measure {
  std::size_t item;
};
struct Select {
  std::size_t item;
};
using Action = std::variant<Measure, Select>;

struct TraceEntry {
  std::size_t step = 0;
  std::size_t item = 0;
  double observation = 0.0;
  double net_voi = 0.0;  // net value of the batch that motivated the measurement
};

struct ControllerState {
  Beliefs beliefs;
  int remaining_budget = 0;
  double spent_cost = 0.0;
  std::vector<TraceEntry> trace;
};

struct Decision {
  Action action;
  /// The batch behind a Measure action (absent for Select).
  std::optional<VoiEstimate> batch;
};

/// Item with the greatest current expected utility, lowest index on ties.
std::size_t best_expected_item(const Beliefs& beliefs, const UtilityFn& utility);

Decision decide(const ControllerState& state, ConstraintFamily family, const MeasurementModel& model,
                const UtilityFn& utility, ExecutionMode mode, const EstimatorSettings& settings);

/// True item values paired with the prior beliefs the controller starts from.
struct Instance {
  std::vector<double> true_values;
  Beliefs prior;
};

struct EpisodeResult {
  std::size_t selected = 0;
  std::size_t best = 0;  // argmax of true utility
  double net_utility = 0.0;
  double regret = 0.0;
  int measurements = 0;
  double spent_cost = 0.0;
  std::uint64_t seed = 0;
  std::vector<TraceEntry> trace;
};

/// Runs the measure-or-stop loop until selection. The j-th observation of
/// item i is x_i + sqrt(noise_variance) * stream.standard_normal(i, j). Monte
/// Carlo seeds for each decision derive from settings.seed and the step index.
EpisodeResult run_episode(const Instance& instance, ConstraintFamily family,
                          const MeasurementModel& model, const UtilityFn& utility,
                          ExecutionMode mode, int budget, const ObservationStream& stream,
                          const EstimatorSettings& settings = {});

/// One line per measurement: step, item, observation, net VOI.
void write_trace(std::ostream& out, const std::vector<TraceEntry>& trace);

}  // namespace semimyopic
