#pragma once

#include <cstddef>
#include <stdexcept>
#include <variant>
#include <vector>

namespace semimyopic {

/// Thrown when an exactly known item is submitted for measurement.
class KnownItemMeasurement : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Normal belief over one item's value. A variance of exactly zero marks an
/// exactly known item.
struct GaussianBelief {
  double mean = 0.0;
  double variance = 1.0;

  bool known() const { return variance == 0.0; }
};

/// i.i.d. observation model y ~ N(x, noise_variance), each measurement costing `cost`.
struct MeasurementModel {
  double noise_variance = 1.0;
  double cost = 0.0;
};

struct PreposteriorSummary {
  double posterior_variance = 0.0;  // variance after k measurements
  double mean_spread = 0.0;         // pre-observation variance of the posterior mean
};

void validate(const GaussianBelief& belief);
void validate(const MeasurementModel& model);

/// Conjugate update from k measurements summarized by their sample mean.
GaussianBelief posterior_update(const GaussianBelief& belief, const MeasurementModel& model,
                                int k, double sample_mean);

/// Preposterior analysis of k future measurements (k = 0 allowed).
PreposteriorSummary preposterior(const GaussianBelief& belief, const MeasurementModel& model,
                                 int k);

/// Gaussian Markov chain over item values stored in information form: a
/// symmetric tridiagonal precision matrix plus the vector of means.
class ChainBelief {
 public:
  /// Generic constructor. `diagonal` has n entries, `off_diagonal` n-1.
  ChainBelief(std::vector<double> means, std::vector<double> diagonal,
              std::vector<double> off_diagonal, double drift_variance);

  /// x_1 ~ N(first_mean, first_variance), x_i = x_{i-1} + w, w ~ N(0, drift_variance).
  static ChainBelief random_walk(std::size_t n, double first_mean, double first_variance,
                                 double drift_variance);

  /// Every item carries its own N(prior_mean, prior_variance) factor and
  /// neighbours are coupled by the increment factor N(x_i - x_{i-1}; 0, drift_variance).
  /// Large drift variance recovers independent N(prior_mean, prior_variance) items.
  static ChainBelief anchored(std::size_t n, double prior_mean, double prior_variance,
                              double drift_variance);

  std::size_t size() const { return means_.size(); }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& diagonal() const { return diagonal_; }
  const std::vector<double>& off_diagonal() const { return off_diagonal_; }
  double drift_variance() const { return drift_variance_; }

  /// Dense covariance (row-major n x n), O(n^2) via tridiagonal solves.
  std::vector<double> covariance() const;

  /// Solves precision * x = rhs in O(n).
  std::vector<double> solve(const std::vector<double>& rhs) const;

 private:
  std::vector<double> means_;
  std::vector<double> diagonal_;
  std::vector<double> off_diagonal_;
  double drift_variance_;
};

/// Exact conditioning on k i.i.d. observations of `item` with the given sample mean.
ChainBelief chain_condition(const ChainBelief& chain, const MeasurementModel& model,
                            std::size_t item, int k, double sample_mean);

/// Marginal mean and variance of each item, O(n).
std::vector<GaussianBelief> chain_marginals(const ChainBelief& chain);

using IndependentBeliefs = std::vector<GaussianBelief>;

/// Belief state over all items: independent per-item Gaussians or one Gaussian chain.
class Beliefs {
 public:
  Beliefs(IndependentBeliefs items);  // NOLINT(google-explicit-constructor)
  Beliefs(ChainBelief chain);         // NOLINT(google-explicit-constructor)

  std::size_t size() const;
  bool is_chain() const { return std::holds_alternative<ChainBelief>(state_); }
  bool known(std::size_t item) const;

  /// Per-item marginals (cached at construction).
  const std::vector<GaussianBelief>& marginals() const { return marginals_; }

  /// Prior covariance of the items, row-major n x n.
  std::vector<double> covariance() const;

  /// New belief state after k observations of `item` with the given sample mean.
  Beliefs observe(const MeasurementModel& model, std::size_t item, int k,
                  double sample_mean) const;

  const IndependentBeliefs* independent() const { return std::get_if<IndependentBeliefs>(&state_); }
  const ChainBelief* chain() const { return std::get_if<ChainBelief>(&state_); }

 private:
  std::variant<IndependentBeliefs, ChainBelief> state_;
  std::vector<GaussianBelief> marginals_;
};

}  // namespace semimyopic
