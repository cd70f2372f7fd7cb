#include "semimyopic/policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace semimyopic {

std::string_view to_string(ExecutionMode mode) {
  return mode == ExecutionMode::kSingleStep ? "single_step" : "whole_batch";
}

ExecutionMode parse_execution_mode(std::string_view name) {
  if (name == "single_step" || name == "single-step") return ExecutionMode::kSingleStep;
  if (name == "whole_batch" || name == "whole-batch") return ExecutionMode::kWholeBatch;
  throw std::invalid_argument("unknown execution mode '" + std::string(name) + "'");
}

std::size_t best_expected_item(const Beliefs& beliefs, const UtilityFn& utility) {
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < beliefs.size(); ++i) {
    const double v = expected_utility(utility, beliefs.marginals()[i]);
    if (v > best_value) {
      best = i;
      best_value = v;
    }
  }
  return best;
}

namespace {

Decision decide_with(const BatchValuator& valuator, const ControllerState& state,
                     ConstraintFamily family, const MeasurementModel& model,
                     const EstimatorSettings& settings) {
  const auto& beliefs = state.beliefs;
  const std::size_t n = beliefs.size();
  if (state.remaining_budget <= 0) return {Select{valuator.current_best()}, std::nullopt};

  std::vector<bool> known(n);
  for (std::size_t i = 0; i < n; ++i) known[i] = beliefs.known(i);
  auto chosen = best_batch(valuator, model, n, known, family, state.remaining_budget, settings);
  if (!(chosen.net > kPositiveVoiThreshold)) return {Select{valuator.current_best()}, std::nullopt};

  // Member of the batch with the largest single-measurement value, lowest index on ties.
  std::size_t item = n;
  double item_value = -std::numeric_limits<double>::infinity();
  if (chosen.batch.items_measured() == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen.batch.allocation[i] > 0) item = i;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen.batch.allocation[i] == 0) continue;
      Batch single{std::vector<int>(n, 0)};
      single.allocation[i] = 1;
      const double v = valuator.estimate(single).net;
      if (v > item_value + kPositiveVoiThreshold) {
        item = i;
        item_value = v;
      }
    }
  }
  return {Measure{item}, std::move(chosen)};
}

}  // namespace

Decision decide(const ControllerState& state, ConstraintFamily family, const MeasurementModel& model,
                const UtilityFn& utility, ExecutionMode mode, const EstimatorSettings& settings) {
  (void)mode;  // the mode changes how run_episode executes the batch, not the choice
  BatchValuator valuator(state.beliefs, model, utility, settings);
  return decide_with(valuator, state, family, model, settings);
}

EpisodeResult run_episode(const Instance& instance, ConstraintFamily family,
                          const MeasurementModel& model, const UtilityFn& utility,
                          ExecutionMode mode, int budget, const ObservationStream& stream,
                          const EstimatorSettings& settings) {
  const std::size_t n = instance.prior.size();
  if (instance.true_values.size() != n) {
    throw std::invalid_argument("instance true values do not match the belief size");
  }
  if (budget < 0) throw std::invalid_argument("budget must be non-negative");

  ControllerState state{instance.prior, budget, 0.0, {}};
  std::vector<std::uint64_t> taken(n, 0);
  const double noise_sd = std::sqrt(model.noise_variance);
  std::size_t step = 0;
  std::size_t selected = 0;

  auto observe = [&](std::size_t item, double net) {
    const double y = instance.true_values[item] + noise_sd * stream.standard_normal(item, taken[item]);
    ++taken[item];
    state.beliefs = state.beliefs.observe(model, item, 1, y);
    state.remaining_budget -= 1;
    state.trace.push_back({step, item, y, net});
    state.spent_cost = model.cost * static_cast<double>(state.trace.size());
  };

  for (;;) {
    EstimatorSettings step_settings = settings;
    step_settings.seed = mix_key({settings.seed, step});
    BatchValuator valuator(state.beliefs, model, utility, step_settings);
    const Decision decision = decide_with(valuator, state, family, model, step_settings);

    if (const auto* s = std::get_if<Select>(&decision.action)) {
      selected = s->item;
      break;
    }
    const auto& measure = std::get<Measure>(decision.action);
    const double net = decision.batch->net;
    if (mode == ExecutionMode::kWholeBatch) {
      for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < decision.batch->batch.allocation[i] && state.remaining_budget > 0; ++k) {
          observe(i, net);
        }
      }
    } else {
      observe(measure.item, net);
    }
    ++step;
  }

  EpisodeResult result;
  result.selected = selected;
  double best_utility = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double u = utility(instance.true_values[i]);
    if (u > best_utility) {
      best_utility = u;
      result.best = i;
    }
  }
  result.measurements = static_cast<int>(state.trace.size());
  result.spent_cost = state.spent_cost;
  result.net_utility = utility(instance.true_values[selected]) - state.spent_cost;
  result.regret = best_utility - result.net_utility;
  result.seed = stream.key();
  result.trace = std::move(state.trace);
  return result;
}

void write_trace(std::ostream& out, const std::vector<TraceEntry>& trace) {
  const auto precision = out.precision(17);
  for (const auto& e : trace) {
    out << e.step << ' ' << e.item << ' ' << e.observation << ' ' << e.net_voi << '\n';
  }
  out.precision(precision);
}

}  // namespace semimyopic
