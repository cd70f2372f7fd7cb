#include "semimyopic/belief.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace semimyopic {

namespace {

void require(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}

// Forward LDL^T pivots of the tridiagonal precision; throws unless all positive.
std::vector<double> forward_pivots(const std::vector<double>& diag, const std::vector<double>& off) {
  const std::size_t n = diag.size();
  std::vector<double> pivots(n);
  for (std::size_t i = 0; i < n; ++i) {
    pivots[i] = diag[i];
    if (i > 0) pivots[i] -= off[i - 1] * off[i - 1] / pivots[i - 1];
    if (!(pivots[i] > 0.0) || !std::isfinite(pivots[i])) {
      throw std::domain_error("chain precision is not positive definite (pivot " +
                              std::to_string(i) + ")");
    }
  }
  return pivots;
}

}  // namespace

void validate(const GaussianBelief& belief) {
  require(std::isfinite(belief.mean), "belief mean must be finite");
  require(std::isfinite(belief.variance) && belief.variance >= 0.0,
          "belief variance must be finite and non-negative");
}

void validate(const MeasurementModel& model) {
  require(model.noise_variance > 0.0, "noise variance must be positive");
  require(std::isfinite(model.cost) && model.cost >= 0.0, "measurement cost must be >= 0");
}

GaussianBelief posterior_update(const GaussianBelief& belief, const MeasurementModel& model,
                                int k, double sample_mean) {
  validate(belief);
  validate(model);
  if (belief.known()) throw KnownItemMeasurement("cannot measure an exactly known item");
  require(k >= 1, "posterior_update: k must be >= 1");

  const double data_precision = k / model.noise_variance;
  const double precision = 1.0 / belief.variance + data_precision;
  const double variance = 1.0 / precision;
  const double mean = variance * (belief.mean / belief.variance + data_precision * sample_mean);
  return {mean, variance};
}

PreposteriorSummary preposterior(const GaussianBelief& belief, const MeasurementModel& model,
                                 int k) {
  validate(belief);
  validate(model);
  require(belief.variance > 0.0, "preposterior: belief variance must be positive");
  require(k >= 0, "preposterior: k must be >= 0");

  if (k == 0 || std::isinf(model.noise_variance)) return {belief.variance, 0.0};
  const double s2 = belief.variance;
  const double posterior = s2 * model.noise_variance / (model.noise_variance + k * s2);
  return {posterior, s2 - posterior};
}

ChainBelief::ChainBelief(std::vector<double> means, std::vector<double> diagonal,
                         std::vector<double> off_diagonal, double drift_variance)
    : means_(std::move(means)),
      diagonal_(std::move(diagonal)),
      off_diagonal_(std::move(off_diagonal)),
      drift_variance_(drift_variance) {
  require(!means_.empty(), "chain must have at least one item");
  require(diagonal_.size() == means_.size(), "chain diagonal size mismatch");
  require(off_diagonal_.size() + 1 == means_.size(), "chain off-diagonal size mismatch");
  require(drift_variance_ > 0.0, "drift variance must be positive");
  for (double m : means_) require(std::isfinite(m), "chain means must be finite");
  forward_pivots(diagonal_, off_diagonal_);
}

ChainBelief ChainBelief::random_walk(std::size_t n, double first_mean, double first_variance,
                                     double drift_variance) {
  require(n >= 1, "chain must have at least one item");
  require(first_variance > 0.0 && drift_variance > 0.0, "chain variances must be positive");
  const double coupling = 1.0 / drift_variance;
  std::vector<double> diag(n, 0.0);
  std::vector<double> off(n - 1, -coupling);
  diag[0] = 1.0 / first_variance;
  for (std::size_t i = 1; i < n; ++i) {
    diag[i - 1] += coupling;
    diag[i] += coupling;
  }
  return ChainBelief(std::vector<double>(n, first_mean), std::move(diag), std::move(off),
                     drift_variance);
}

ChainBelief ChainBelief::anchored(std::size_t n, double prior_mean, double prior_variance,
                                  double drift_variance) {
  require(n >= 1, "chain must have at least one item");
  require(prior_variance > 0.0 && drift_variance > 0.0, "chain variances must be positive");
  const double coupling = 1.0 / drift_variance;
  std::vector<double> diag(n, 1.0 / prior_variance);
  std::vector<double> off(n - 1, -coupling);
  for (std::size_t i = 1; i < n; ++i) {
    diag[i - 1] += coupling;
    diag[i] += coupling;
  }
  return ChainBelief(std::vector<double>(n, prior_mean), std::move(diag), std::move(off),
                     drift_variance);
}

std::vector<double> ChainBelief::solve(const std::vector<double>& rhs) const {
  const std::size_t n = size();
  require(rhs.size() == n, "chain solve: size mismatch");
  const auto pivots = forward_pivots(diagonal_, off_diagonal_);
  std::vector<double> x(rhs);
  for (std::size_t i = 1; i < n; ++i) x[i] -= off_diagonal_[i - 1] / pivots[i - 1] * x[i - 1];
  x[n - 1] /= pivots[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - off_diagonal_[i] * x[i + 1]) / pivots[i];
  return x;
}

std::vector<double> ChainBelief::covariance() const {
  const std::size_t n = size();
  std::vector<double> cov(n * n);
  std::vector<double> unit(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    unit[j] = 1.0;
    const auto column = solve(unit);
    unit[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) cov[i * n + j] = column[i];
  }
  // Exact symmetry.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (cov[i * n + j] + cov[j * n + i]);
      cov[i * n + j] = cov[j * n + i] = v;
    }
  }
  return cov;
}

ChainBelief chain_condition(const ChainBelief& chain, const MeasurementModel& model,
                            std::size_t item, int k, double sample_mean) {
  validate(model);
  if (item >= chain.size()) throw std::out_of_range("chain_condition: item index out of range");
  require(k >= 1, "chain_condition: k must be >= 1");

  const double data_precision = k / model.noise_variance;
  auto diag = chain.diagonal();
  diag[item] += data_precision;
  ChainBelief updated(chain.means(), std::move(diag), chain.off_diagonal(),
                      chain.drift_variance());

  // Lambda' (m' - m) = e_item * data_precision * (ybar - m_item)
  std::vector<double> rhs(chain.size(), 0.0);
  rhs[item] = data_precision * (sample_mean - chain.means()[item]);
  const auto shift = updated.solve(rhs);
  std::vector<double> means = chain.means();
  for (std::size_t i = 0; i < means.size(); ++i) means[i] += shift[i];
  return ChainBelief(std::move(means), updated.diagonal(), updated.off_diagonal(),
                     chain.drift_variance());
}

std::vector<GaussianBelief> chain_marginals(const ChainBelief& chain) {
  const auto& a = chain.diagonal();
  const auto& b = chain.off_diagonal();
  const std::size_t n = chain.size();
  const auto down = forward_pivots(a, b);
  std::vector<double> up(n);
  for (std::size_t i = n; i-- > 0;) {
    up[i] = a[i];
    if (i + 1 < n) up[i] -= b[i] * b[i] / up[i + 1];
  }
  std::vector<GaussianBelief> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double inverse_variance = down[i] + up[i] - a[i];
    if (!(inverse_variance > 0.0)) throw std::domain_error("chain marginal variance not positive");
    out[i] = {chain.means()[i], 1.0 / inverse_variance};
  }
  return out;
}

Beliefs::Beliefs(IndependentBeliefs items) : state_(std::move(items)) {
  const auto& list = std::get<IndependentBeliefs>(state_);
  require(!list.empty(), "beliefs must cover at least one item");
  for (const auto& b : list) validate(b);
  marginals_ = list;
}

Beliefs::Beliefs(ChainBelief chain) : state_(std::move(chain)) {
  marginals_ = chain_marginals(std::get<ChainBelief>(state_));
}

std::size_t Beliefs::size() const { return marginals_.size(); }

bool Beliefs::known(std::size_t item) const { return marginals_.at(item).known(); }

std::vector<double> Beliefs::covariance() const {
  if (const auto* c = chain()) return c->covariance();
  const std::size_t n = size();
  std::vector<double> cov(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) cov[i * n + i] = marginals_[i].variance;
  return cov;
}

Beliefs Beliefs::observe(const MeasurementModel& model, std::size_t item, int k,
                         double sample_mean) const {
  if (item >= size()) throw std::out_of_range("observe: item index out of range");
  if (const auto* c = chain()) return Beliefs(chain_condition(*c, model, item, k, sample_mean));
  auto items = std::get<IndependentBeliefs>(state_);
  items[item] = posterior_update(items[item], model, k, sample_mean);
  return Beliefs(std::move(items));
}

}  // namespace semimyopic
