#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semimyopic/belief.hpp"
#include "semimyopic/utility.hpp"

namespace semimyopic {

/// Which measurement batches a semi-myopic estimator may consider.
enum class ConstraintFamily {
  kMyopic,      // one measurement
  kBlinkered,   // any number of measurements of a single item
  kOmniMyopic,  // at most one measurement per item
  kExhaustive,  // any allocation within the budget
};

std::string_view to_string(ConstraintFamily family);
ConstraintFamily parse_family(std::string_view name);

/// Measurement counts per item.
struct Batch {
  std::vector<int> allocation;

  int total() const;
  std::size_t items_measured() const;
  bool operator==(const Batch&) const = default;
};

std::string to_string(const Batch& batch);

struct VoiEstimate {
  double intrinsic = 0.0;
  double cost = 0.0;
  double net = 0.0;  // intrinsic - cost
  Batch batch;
};

struct EstimatorSettings {
  double quadrature_tolerance = 1e-8;
  std::size_t mc_samples = 10'000;
  std::uint64_t seed = 0;
  bool bisection = false;
  std::size_t enumeration_limit = 2'000'000;
};

class EnumerationLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Values batches against one fixed belief state. Single-item batches are
/// integrated in one dimension along the preposterior shift of the means;
/// multi-item batches use Monte Carlo with one set of standard normal draws
/// shared by every batch valued through the same instance.
///
/// Not thread-safe: Monte Carlo tables are filled lazily.
class BatchValuator {
 public:
  BatchValuator(const Beliefs& beliefs, const MeasurementModel& model, const UtilityFn& utility,
                const EstimatorSettings& settings);
  ~BatchValuator();
  BatchValuator(BatchValuator&&) noexcept;
  BatchValuator& operator=(BatchValuator&&) noexcept;

  /// Expected gain in the best expected utility from observing the batch.
  double intrinsic(const Batch& batch) const;

  VoiEstimate estimate(const Batch& batch) const;

  /// Index of the item with the greatest current expected utility (lowest index on ties).
  std::size_t current_best() const;

  /// Current expected utility of each item.
  const std::vector<double>& expected_utilities() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

double intrinsic_batch_value(const Beliefs& beliefs, const MeasurementModel& model,
                             const UtilityFn& utility, const Batch& batch,
                             const EstimatorSettings& settings = {});

/// Myopic estimate of k measurements of one item.
VoiEstimate mvi_k(const Beliefs& beliefs, const MeasurementModel& model, const UtilityFn& utility,
                  std::size_t item, int k, const EstimatorSettings& settings = {});

/// Blinkered estimate: the best mvi_k over k = 1..budget.
VoiEstimate bvi(const Beliefs& beliefs, const MeasurementModel& model, const UtilityFn& utility,
                std::size_t item, int budget, const EstimatorSettings& settings = {});
VoiEstimate bvi(const BatchValuator& valuator, const MeasurementModel& model, std::size_t item,
                std::size_t n, int budget, bool bisection);

/// Number of batches the family allows; saturates instead of overflowing.
std::size_t count_batches(ConstraintFamily family, std::size_t unknown_items, int budget);

/// Non-empty allocations allowed by the family, ordered by total and then
/// with measurements on lower item indices first.
std::vector<Batch> enumerate_batches(ConstraintFamily family, std::size_t n, int budget,
                                     const std::vector<bool>& known_mask,
                                     std::size_t limit = 2'000'000);

/// Highest-net batch of the family. Ties go to the smaller total, then to
/// measurements on lower indices. Returns a zero estimate with an all-zero
/// batch when nothing can be measured.
VoiEstimate best_batch(const Beliefs& beliefs, const MeasurementModel& model,
                       const UtilityFn& utility, ConstraintFamily family, int budget,
                       const EstimatorSettings& settings = {});
VoiEstimate best_batch(const BatchValuator& valuator, const MeasurementModel& model,
                       std::size_t n, const std::vector<bool>& known_mask, ConstraintFamily family,
                       int budget, const EstimatorSettings& settings);

}  // namespace semimyopic
