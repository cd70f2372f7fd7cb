#include "semimyopic/voi.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

#include "semimyopic/numerics.hpp"
#include "semimyopic/rng.hpp"

namespace semimyopic {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kGridStep = 0.1;

bool better(const VoiEstimate& candidate, const VoiEstimate& incumbent) {
  if (candidate.net > incumbent.net + kTieTolerance) return true;
  if (candidate.net < incumbent.net - kTieTolerance) return false;
  return candidate.batch.total() < incumbent.batch.total();
}

VoiEstimate empty_estimate(std::size_t n) {
  VoiEstimate e;
  e.batch.allocation.assign(n, 0);
  return e;
}

}  // namespace

std::string_view to_string(ConstraintFamily family) {
  switch (family) {
    case ConstraintFamily::kMyopic: return "myopic";
    case ConstraintFamily::kBlinkered: return "blinkered";
    case ConstraintFamily::kOmniMyopic: return "omni-myopic";
    case ConstraintFamily::kExhaustive: return "exhaustive";
  }
  return "unknown";
}

ConstraintFamily parse_family(std::string_view name) {
  if (name == "myopic") return ConstraintFamily::kMyopic;
  if (name == "blinkered") return ConstraintFamily::kBlinkered;
  if (name == "omni-myopic" || name == "omni_myopic" || name == "omnimyopic") {
    return ConstraintFamily::kOmniMyopic;
  }
  if (name == "exhaustive") return ConstraintFamily::kExhaustive;
  throw std::invalid_argument("unknown constraint family '" + std::string(name) + "'");
}

int Batch::total() const { return std::accumulate(allocation.begin(), allocation.end(), 0); }

std::size_t Batch::items_measured() const {
  return static_cast<std::size_t>(
      std::count_if(allocation.begin(), allocation.end(), [](int k) { return k > 0; }));
}

std::string to_string(const Batch& batch) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < batch.allocation.size(); ++i) {
    if (i) out << ',';
    out << batch.allocation[i];
  }
  out << ')';
  return out.str();
}

struct BatchValuator::Impl {
  Beliefs beliefs;
  MeasurementModel model;
  UtilityFn utility;
  EstimatorSettings settings;
  std::size_t n;
  std::vector<double> eu;
  std::size_t alpha = 0;
  std::vector<double> cov;  // dense prior covariance, chains only

  mutable std::vector<double> draws;  // mc_samples x n
  mutable std::map<std::pair<std::size_t, int>, std::vector<double>> tables;

  Impl(const Beliefs& b, const MeasurementModel& m, const UtilityFn& u, const EstimatorSettings& s)
      : beliefs(b), model(m), utility(u), settings(s), n(b.size()) {
    validate(model);
    eu.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      eu[i] = expected_utility(utility, beliefs.marginals()[i]);
      if (eu[i] > eu[alpha]) alpha = i;
    }
    if (beliefs.is_chain()) cov = beliefs.covariance();
  }

  double posterior_eu(double mean, double variance) const {
    return expected_utility(utility, GaussianBelief{mean, std::max(variance, 0.0)});
  }

  void check(const Batch& batch) const {
    if (batch.allocation.size() != n) throw std::invalid_argument("batch size does not match item count");
    for (std::size_t i = 0; i < n; ++i) {
      if (batch.allocation[i] < 0) throw std::invalid_argument("batch allocation must be non-negative");
      if (batch.allocation[i] > 0 && beliefs.known(i)) {
        throw KnownItemMeasurement("batch measures exactly known item " + std::to_string(i));
      }
    }
    if (batch.total() < 1) throw std::invalid_argument("batch must contain at least one measurement");
  }

  double single_item(std::size_t item, int k) const;
  double monte_carlo(const Batch& batch) const;
  const std::vector<double>& standard_draws() const;
  const std::vector<double>& table(std::size_t item, int k) const;
};

// The k observations move the posterior means along one direction:
// mean_j(z) = mean_j + shift_j z with z ~ N(0, 1). The intrinsic value is the
// expectation of max_j EU_j(z) - EU_alpha(z), which is pointwise non-negative
// and reduces to the usual clamped benefit terms for independent items.
double BatchValuator::Impl::single_item(std::size_t item, int k) const {
  const auto& marg = beliefs.marginals();
  std::vector<double> shift(n, 0.0);
  std::vector<double> post_var(n);
  for (std::size_t j = 0; j < n; ++j) post_var[j] = marg[j].variance;

  if (!beliefs.is_chain()) {
    const auto pre = preposterior(marg[item], model, k);
    shift[item] = std::sqrt(pre.mean_spread);
    post_var[item] = pre.posterior_variance;
  } else {
    const double innovation = cov[item * n + item] + model.noise_variance / k;
    const double root = std::sqrt(innovation);
    for (std::size_t j = 0; j < n; ++j) {
      const double c = cov[j * n + item];
      shift[j] = c / root;
      post_var[j] = cov[j * n + j] - c * c / innovation;
    }
  }

  std::vector<std::size_t> moving;
  std::size_t still_best = n;
  for (std::size_t j = 0; j < n; ++j) {
    if (shift[j] != 0.0) {
      moving.push_back(j);
    } else if (still_best == n || eu[j] > eu[still_best]) {
      still_best = j;
    }
  }
  if (moving.empty()) return 0.0;

  auto value_of = [&](std::size_t j, double z) {
    return posterior_eu(marg[j].mean + shift[j] * z, post_var[j]);
  };
  // Leader at z, lowest index on ties.
  auto leader = [&](double z) {
    std::size_t best = n;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (shift[j] == 0.0 && j != still_best) continue;
      const double v = shift[j] == 0.0 ? eu[j] : value_of(j, z);
      if (v > best_value || (v == best_value && j < best)) {
        best = j;
        best_value = v;
      }
    }
    return std::pair{best, best_value};
  };
  auto benefit = [&](double z) {
    const double top = leader(z).second;
    const double base = shift[alpha] == 0.0 ? eu[alpha] : value_of(alpha, z);
    return std::max(top - base, 0.0) * numerics::normal_pdf(z);
  };

  // Locate changes of leader on a grid and refine them by bisection.
  const double lo = -numerics::kTailCutoff;
  const double hi = numerics::kTailCutoff;
  const int steps = static_cast<int>(std::lround((hi - lo) / kGridStep));
  std::vector<double> cuts{lo};
  std::size_t previous = leader(lo).first;
  double z_prev = lo;
  for (int g = 1; g <= steps; ++g) {
    const double z = lo + g * kGridStep;
    const std::size_t current = leader(z).first;
    if (current != previous) {
      double a = z_prev;
      double b = z;
      for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
        const double mid = 0.5 * (a + b);
        (leader(mid).first == previous ? a : b) = mid;
      }
      cuts.push_back(0.5 * (a + b));
      previous = current;
    }
    z_prev = z;
  }
  cuts.push_back(hi);

  double total = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s];
    const double b = cuts[s + 1];
    if (!(b > a)) continue;
    if (leader(0.5 * (a + b)).first == alpha) continue;  // benefit is identically zero
    total += numerics::integrate(benefit, a, b, settings.quadrature_tolerance);
  }
  return total;
}

const std::vector<double>& BatchValuator::Impl::standard_draws() const {
  if (draws.empty()) {
    if (settings.mc_samples == 0) throw std::invalid_argument("mc_samples must be positive");
    auto engine = make_engine(mix_key({settings.seed, 0x6d6f6e7465ULL}));
    std::normal_distribution<double> normal;
    draws.resize(settings.mc_samples * n);
    for (auto& d : draws) d = normal(engine);
  }
  return draws;
}

const std::vector<double>& BatchValuator::Impl::table(std::size_t item, int k) const {
  auto [it, inserted] = tables.try_emplace({item, k});
  if (inserted) {
    const auto& z = standard_draws();
    const auto& b = beliefs.marginals()[item];
    const auto pre = preposterior(b, model, k);
    const double spread = std::sqrt(pre.mean_spread);
    auto& values = it->second;
    values.resize(settings.mc_samples);
    for (std::size_t s = 0; s < settings.mc_samples; ++s) {
      values[s] = posterior_eu(b.mean + spread * z[s * n + item], pre.posterior_variance);
    }
  }
  return it->second;
}

double BatchValuator::Impl::monte_carlo(const Batch& batch) const {
  const auto& z = standard_draws();
  const std::size_t samples = settings.mc_samples;
  std::vector<std::size_t> measured;
  for (std::size_t j = 0; j < n; ++j) {
    if (batch.allocation[j] > 0) measured.push_back(j);
  }

  if (!beliefs.is_chain()) {
    double idle_best = -std::numeric_limits<double>::infinity();
    std::vector<const std::vector<double>*> rows;
    for (std::size_t j = 0; j < n; ++j) {
      if (batch.allocation[j] > 0) {
        rows.push_back(&table(j, batch.allocation[j]));
      } else {
        idle_best = std::max(idle_best, eu[j]);
      }
    }
    const std::vector<double>* alpha_row =
        batch.allocation[alpha] > 0 ? &table(alpha, batch.allocation[alpha]) : nullptr;
    double sum = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      double top = idle_best;
      for (const auto* row : rows) top = std::max(top, (*row)[s]);
      const double base = alpha_row ? (*alpha_row)[s] : eu[alpha];
      sum += std::max(top - base, 0.0);
    }
    return sum / static_cast<double>(samples);
  }

  // Chain: posterior means move by gain * z_measured, z ~ N(0, I).
  const auto d = static_cast<Eigen::Index>(measured.size());
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> sigma(
      cov.data(), nn, nn);
  Eigen::MatrixXd cross(nn, d);
  Eigen::MatrixXd innovation(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    cross.col(a) = sigma.col(static_cast<Eigen::Index>(measured[a]));
    for (Eigen::Index b = 0; b < d; ++b) {
      innovation(a, b) = sigma(static_cast<Eigen::Index>(measured[a]), static_cast<Eigen::Index>(measured[b]));
    }
    innovation(a, a) += model.noise_variance / batch.allocation[measured[a]];
  }
  Eigen::LLT<Eigen::MatrixXd> llt(innovation);
  if (llt.info() != Eigen::Success) throw std::domain_error("innovation covariance not positive definite");
  // gain = cross * S^{-1} * L  =  cross * L^{-T}
  const Eigen::MatrixXd gain =
      llt.matrixU().transpose().solve(cross.transpose()).transpose();  // (L^{-1} cross^T)^T
  std::vector<double> post_var(n);
  for (std::size_t j = 0; j < n; ++j) {
    post_var[j] = sigma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) -
                  gain.row(static_cast<Eigen::Index>(j)).squaredNorm();
  }

  const auto& marg = beliefs.marginals();
  double sum = 0.0;
  Eigen::VectorXd zs(d);
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index a = 0; a < d; ++a) zs(a) = z[s * n + measured[a]];
    double top = -std::numeric_limits<double>::infinity();
    double base = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double mean = marg[j].mean + gain.row(static_cast<Eigen::Index>(j)).dot(zs);
      const double v = posterior_eu(mean, post_var[j]);
      top = std::max(top, v);
      if (j == alpha) base = v;
    }
    sum += std::max(top - base, 0.0);
  }
  return sum / static_cast<double>(samples);
}

BatchValuator::BatchValuator(const Beliefs& beliefs, const MeasurementModel& model,
                             const UtilityFn& utility, const EstimatorSettings& settings)
    : impl_(std::make_unique<Impl>(beliefs, model, utility, settings)) {}
BatchValuator::~BatchValuator() = default;
BatchValuator::BatchValuator(BatchValuator&&) noexcept = default;
BatchValuator& BatchValuator::operator=(BatchValuator&&) noexcept = default;

double BatchValuator::intrinsic(const Batch& batch) const {
  impl_->check(batch);
  if (impl_->n < 2) return 0.0;
  const std::size_t measured = batch.items_measured();
  if (measured == 1) {
    const auto it = std::find_if(batch.allocation.begin(), batch.allocation.end(),
                                 [](int k) { return k > 0; });
    const auto item = static_cast<std::size_t>(it - batch.allocation.begin());
    return impl_->single_item(item, *it);
  }
  return impl_->monte_carlo(batch);
}

VoiEstimate BatchValuator::estimate(const Batch& batch) const {
  VoiEstimate e;
  e.intrinsic = intrinsic(batch);
  e.cost = batch.total() * impl_->model.cost;
  e.net = e.intrinsic - e.cost;
  e.batch = batch;
  return e;
}

std::size_t BatchValuator::current_best() const { return impl_->alpha; }

const std::vector<double>& BatchValuator::expected_utilities() const { return impl_->eu; }

double intrinsic_batch_value(const Beliefs& beliefs, const MeasurementModel& model,
                             const UtilityFn& utility, const Batch& batch,
                             const EstimatorSettings& settings) {
  return BatchValuator(beliefs, model, utility, settings).intrinsic(batch);
}

VoiEstimate mvi_k(const Beliefs& beliefs, const MeasurementModel& model, const UtilityFn& utility,
                  std::size_t item, int k, const EstimatorSettings& settings) {
  if (item >= beliefs.size()) throw std::out_of_range("mvi_k: item index out of range");
  if (k < 1) throw std::invalid_argument("mvi_k: k must be >= 1");
  Batch batch{std::vector<int>(beliefs.size(), 0)};
  batch.allocation[item] = k;
  return BatchValuator(beliefs, model, utility, settings).estimate(batch);
}

VoiEstimate bvi(const BatchValuator& valuator, const MeasurementModel& model, std::size_t item,
                std::size_t n, int budget, bool bisection) {
  (void)model;
  if (budget < 1) return empty_estimate(n);
  auto at = [&](int k) {
    Batch batch{std::vector<int>(n, 0)};
    batch.allocation[item] = k;
    return valuator.estimate(batch);
  };

  if (bisection) {
    // Unimodal net value in k: find the first k whose successor is no better.
    int lo = 1;
    int hi = budget;
    std::map<int, VoiEstimate> memo;
    auto net = [&](int k) -> const VoiEstimate& {
      auto it = memo.find(k);
      if (it == memo.end()) it = memo.emplace(k, at(k)).first;
      return it->second;
    };
    while (lo < hi) {
      const int mid = lo + (hi - lo) / 2;
      if (net(mid + 1).net > net(mid).net + kTieTolerance) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return net(lo);
  }

  VoiEstimate best = at(1);
  for (int k = 2; k <= budget; ++k) {
    auto e = at(k);
    if (e.net > best.net + kTieTolerance) best = std::move(e);
  }
  return best;
}

VoiEstimate bvi(const Beliefs& beliefs, const MeasurementModel& model, const UtilityFn& utility,
                std::size_t item, int budget, const EstimatorSettings& settings) {
  if (item >= beliefs.size()) throw std::out_of_range("bvi: item index out of range");
  if (budget >= 1 && beliefs.known(item)) {
    throw KnownItemMeasurement("bvi: item " + std::to_string(item) + " is exactly known");
  }
  BatchValuator valuator(beliefs, model, utility, settings);
  return bvi(valuator, model, item, beliefs.size(), budget, settings.bisection);
}

namespace {

std::size_t saturating_binomial(std::size_t n, std::size_t k) {
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double r = 1.0L;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (r > static_cast<long double>(kMax) / 2) return kMax;
  }
  return static_cast<std::size_t>(std::llround(r));
}

void compositions(int remaining, std::size_t position, const std::vector<std::size_t>& slots,
                  std::vector<int>& current, std::vector<Batch>& out) {
  if (position + 1 == slots.size()) {
    current[slots[position]] = remaining;
    out.push_back(Batch{current});
    current[slots[position]] = 0;
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    current[slots[position]] = k;
    compositions(remaining - k, position + 1, slots, current, out);
  }
  current[slots[position]] = 0;
}

void subsets(std::size_t size, std::size_t start, const std::vector<std::size_t>& slots,
             std::vector<int>& current, std::vector<Batch>& out) {
  if (size == 0) {
    out.push_back(Batch{current});
    return;
  }
  for (std::size_t p = start; p + size <= slots.size(); ++p) {
    current[slots[p]] = 1;
    subsets(size - 1, p + 1, slots, current, out);
    current[slots[p]] = 0;
  }
}

}  // namespace

std::size_t count_batches(ConstraintFamily family, std::size_t unknown_items, int budget) {
  if (unknown_items == 0 || budget < 1) return 0;
  const auto m = static_cast<std::size_t>(budget);
  switch (family) {
    case ConstraintFamily::kMyopic: return unknown_items;
    case ConstraintFamily::kBlinkered: return unknown_items * m;
    case ConstraintFamily::kOmniMyopic: {
      std::size_t total = 0;
      for (std::size_t t = 1; t <= std::min(unknown_items, m); ++t) {
        total += saturating_binomial(unknown_items, t);
      }
      return total;
    }
    case ConstraintFamily::kExhaustive: {
      const auto all = saturating_binomial(m + unknown_items, unknown_items);
      return all == std::numeric_limits<std::size_t>::max() ? all : all - 1;
    }
  }
  return 0;
}

std::vector<Batch> enumerate_batches(ConstraintFamily family, std::size_t n, int budget,
                                     const std::vector<bool>& known_mask, std::size_t limit) {
  if (known_mask.size() != n) throw std::invalid_argument("known_mask size mismatch");
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < n; ++i) {
    if (!known_mask[i]) slots.push_back(i);
  }
  const std::size_t count = count_batches(family, slots.size(), budget);
  if (count > limit) {
    throw EnumerationLimitExceeded(std::string(to_string(family)) + " enumeration of " +
                                   std::to_string(count) + " batches exceeds the limit of " +
                                   std::to_string(limit));
  }

  std::vector<Batch> out;
  out.reserve(count);
  std::vector<int> current(n, 0);
  switch (family) {
    case ConstraintFamily::kMyopic:
      for (auto i : slots) {
        current[i] = 1;
        out.push_back(Batch{current});
        current[i] = 0;
      }
      break;
    case ConstraintFamily::kBlinkered:
      for (int k = 1; k <= budget; ++k) {
        for (auto i : slots) {
          current[i] = k;
          out.push_back(Batch{current});
          current[i] = 0;
        }
      }
      break;
    case ConstraintFamily::kOmniMyopic:
      for (std::size_t t = 1; t <= slots.size() && static_cast<int>(t) <= budget; ++t) {
        subsets(t, 0, slots, current, out);
      }
      break;
    case ConstraintFamily::kExhaustive:
      if (slots.empty()) break;
      for (int t = 1; t <= budget; ++t) compositions(t, 0, slots, current, out);
      break;
  }
  return out;
}

VoiEstimate best_batch(const BatchValuator& valuator, const MeasurementModel& model,
                       std::size_t n, const std::vector<bool>& known_mask, ConstraintFamily family,
                       int budget, const EstimatorSettings& settings) {
  VoiEstimate best = empty_estimate(n);
  bool found = false;
  if (budget < 1) return best;

  if (family == ConstraintFamily::kBlinkered) {
    for (std::size_t i = 0; i < n; ++i) {
      if (known_mask[i]) continue;
      auto e = bvi(valuator, model, i, n, budget, settings.bisection);
      if (!found || better(e, best)) {
        best = std::move(e);
        found = true;
      }
    }
    return best;
  }

  for (const auto& batch : enumerate_batches(family, n, budget, known_mask, settings.enumeration_limit)) {
    auto e = valuator.estimate(batch);
    if (!found || better(e, best)) {
      best = std::move(e);
      found = true;
    }
  }
  return best;
}

VoiEstimate best_batch(const Beliefs& beliefs, const MeasurementModel& model,
                       const UtilityFn& utility, ConstraintFamily family, int budget,
                       const EstimatorSettings& settings) {
  std::vector<bool> known(beliefs.size());
  for (std::size_t i = 0; i < beliefs.size(); ++i) known[i] = beliefs.known(i);
  BatchValuator valuator(beliefs, model, utility, settings);
  return best_batch(valuator, model, beliefs.size(), known, family, budget, settings);
}

}  // namespace semimyopic
