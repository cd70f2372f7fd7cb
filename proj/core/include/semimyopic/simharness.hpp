#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "semimyopic/policy.hpp"

namespace semimyopic {

struct KnownItem {
  std::size_t index = 0;
  double value = 1.0;
};

enum class DependencyKind { kNone, kChain };

/// How a chain prior is built from its parameters (see ChainBelief).
enum class ChainForm { kAnchored, kRandomWalk };

struct InstanceSpec {
  std::size_t n = 2;
  std::optional<KnownItem> known_item;
  double prior_mean = 0.0;
  double prior_variance = 1.0;
  DependencyKind dependency = DependencyKind::kNone;
  double drift_variance = 1.0;
  ChainForm chain_form = ChainForm::kAnchored;
  UtilityFn utility;
};

void validate(const InstanceSpec& spec);

/// Prior beliefs described by an InstanceSpec (no sampling).
Beliefs prior_beliefs(const InstanceSpec& spec);

/// Builds priors from `spec` and samples true values from them (from the
/// joint chain prior when dependent). Deterministic in `stream_key`.
Instance generate_instance(const InstanceSpec& spec, std::uint64_t stream_key);

struct GridSpec {
  std::vector<double> sigma_o2;
  std::vector<double> costs;
  int budget = 5;
  int replicates = 100;
  std::vector<ConstraintFamily> schemes;
  ExecutionMode mode = ExecutionMode::kSingleStep;
  std::uint64_t master_seed = 0;
  EstimatorSettings estimator;
  std::size_t threads = 1;
};

struct EpisodeRecord {
  ConstraintFamily scheme{};
  std::size_t cell = 0;
  std::size_t n = 0;
  int budget = 0;
  double sigma_o2 = 0.0;
  double cost = 0.0;
  int replicate = 0;
  EpisodeResult result;
};

/// Paired comparison first - second of per-replicate regrets.
struct PairStats {
  ConstraintFamily first{};
  ConstraintFamily second{};
  double mean_diff = 0.0;
  double std_diff = 0.0;
};

struct CellStats {
  std::size_t cell = 0;
  double sigma_o2 = 0.0;
  double cost = 0.0;
  int replicates = 0;
  std::vector<ConstraintFamily> schemes;
  std::vector<double> mean_regret;  // per scheme
  std::vector<double> std_regret;
  std::vector<PairStats> pairs;     // every scheme pair in listed order
  std::optional<std::string> error;
};

struct GridResult {
  std::vector<EpisodeRecord> episodes;
  std::vector<CellStats> cells;
};

/// Runs every (sigma_o2, cost) cell, replicate and scheme. Within a cell and
/// replicate all schemes share the instance and the observation stream.
GridResult run_grid(const GridSpec& grid, const InstanceSpec& spec);

struct SweepSpec {
  std::vector<double> ratios;  // sigma_o2 / drift_variance
  double sigma_o2 = 4.0;
  double cost = 0.002;
  int budget = 10;
  int replicates = 100;
  std::uint64_t master_seed = 0;
  EstimatorSettings estimator;
  std::size_t threads = 1;
  ExecutionMode mode = ExecutionMode::kSingleStep;
};

/// Drift variance standing in for "no dependency" at ratio 0.
inline constexpr double kIndependentDriftVariance = 1e8;

struct SweepPoint {
  double ratio = 0.0;
  double drift_variance = 0.0;
  CellStats stats;            // schemes: blinkered, omni-myopic
  double utility_difference;  // mean net utility, blinkered minus omni-myopic
};

struct SweepResult {
  std::vector<EpisodeRecord> episodes;
  std::vector<SweepPoint> points;
};

/// Blinkered versus omni-myopic across dependency strengths on a chain spec.
SweepResult dependency_sweep(const InstanceSpec& base, const SweepSpec& sweep);

void write_episode_csv(std::ostream& out, const std::vector<EpisodeRecord>& episodes);
void write_summary_csv(std::ostream& out, const std::vector<CellStats>& cells);
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);

}  // namespace semimyopic
