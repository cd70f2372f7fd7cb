#include "semimyopic/oracle.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <variant>

#include "semimyopic/numerics.hpp"
#include "semimyopic/policy.hpp"
#include "semimyopic/rng.hpp"

namespace semimyopic::oracle {

namespace {

constexpr double kStopPreference = 1e-12;

void check_guard(const IndependentBeliefs& beliefs, int budget, const ObsGrid& grid) {
  if (grid.nodes < 3 || grid.nodes % 2 == 0) {
    throw std::invalid_argument("observation grid needs an odd node count >= 3");
  }
  if (budget < 0) throw std::invalid_argument("budget must be non-negative");
  if (beliefs.size() > kMaxPlanItems || budget > kMaxPlanBudget) {
    throw Intractable("exact planning is limited to " + std::to_string(kMaxPlanItems) + " items and budget " +
                      std::to_string(kMaxPlanBudget));
  }
}

double select_value(const IndependentBeliefs& beliefs, const UtilityFn& utility) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& b : beliefs) best = std::max(best, expected_utility(utility, b));
  return best;
}

class Planner {
 public:
  Planner(const MeasurementModel& model, const UtilityFn& utility, const ObsGrid& grid)
      : model_(model), utility_(utility), rule_(numerics::gauss_hermite(grid.nodes)) {}

  double value(const IndependentBeliefs& beliefs, int budget) const {
    double best = select_value(beliefs, utility_);
    if (budget == 0) return best;
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
      if (beliefs[i].known()) continue;
      best = std::max(best, continuation(beliefs, i, budget));
    }
    return best;
  }

  // Value of measuring item i once and continuing optimally.
  double continuation(const IndependentBeliefs& beliefs, std::size_t i, int budget) const {
    const double sd = std::sqrt(beliefs[i].variance + model_.noise_variance);
    IndependentBeliefs next = beliefs;
    double sum = 0.0;
    for (std::size_t q = 0; q < rule_.nodes.size(); ++q) {
      const double y = beliefs[i].mean + sd * rule_.nodes[q];
      next[i] = posterior_update(beliefs[i], model_, 1, y);
      sum += rule_.weights[q] * value(next, budget - 1);
    }
    return sum - model_.cost;
  }

 private:
  MeasurementModel model_;
  UtilityFn utility_;
  const numerics::GaussHermiteRule& rule_;
};

}  // namespace

double optimal_plan_value(const IndependentBeliefs& beliefs, const MeasurementModel& model,
                          const UtilityFn& utility, int budget, const ObsGrid& grid) {
  check_guard(beliefs, budget, grid);
  validate(model);
  return Planner(model, utility, grid).value(beliefs, budget);
}

std::optional<std::size_t> optimal_action(const IndependentBeliefs& beliefs,
                                          const MeasurementModel& model, const UtilityFn& utility,
                                          int budget, const ObsGrid& grid) {
  check_guard(beliefs, budget, grid);
  validate(model);
  if (budget == 0) return std::nullopt;
  Planner planner(model, utility, grid);
  double best = select_value(beliefs, utility) + kStopPreference;
  std::optional<std::size_t> action;
  for (std::size_t i = 0; i < beliefs.size(); ++i) {
    if (beliefs[i].known()) continue;
    const double v = planner.continuation(beliefs, i, budget);
    if (v > best) {
      best = v;
      action = i;
    }
  }
  return action;
}

MonteCarloValue rollout_optimal_policy(const IndependentBeliefs& beliefs,
                                       const MeasurementModel& model, const UtilityFn& utility,
                                       int budget, const ObsGrid& grid, std::size_t episodes,
                                       std::uint64_t seed, RolloutModel sampling) {
  check_guard(beliefs, budget, grid);
  if (episodes < 2) throw std::invalid_argument("rollout needs at least two episodes");
  auto engine = make_engine(seed);
  std::normal_distribution<double> normal;
  const double noise_sd = std::sqrt(model.noise_variance);
  const auto& rule = numerics::gauss_hermite(grid.nodes);
  std::discrete_distribution<std::size_t> node(rule.weights.begin(), rule.weights.end());
  const bool continuous = sampling == RolloutModel::kContinuous;

  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<double> truth(beliefs.size());
  for (std::size_t e = 0; e < episodes; ++e) {
    if (continuous) {
      for (std::size_t i = 0; i < beliefs.size(); ++i) {
        truth[i] = beliefs[i].mean + std::sqrt(beliefs[i].variance) * normal(engine);
      }
    }
    IndependentBeliefs state = beliefs;
    double cost = 0.0;
    for (int r = budget; r > 0; --r) {
      const auto action = optimal_action(state, model, utility, r, grid);
      if (!action) break;
      const auto& b = state[*action];
      const double y = continuous ? truth[*action] + noise_sd * normal(engine)
                                  : b.mean + std::sqrt(b.variance + model.noise_variance) * rule.nodes[node(engine)];
      state[*action] = posterior_update(b, model, 1, y);
      cost += model.cost;
    }
    std::size_t chosen = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.size(); ++i) {
      const double v = expected_utility(utility, state[i]);
      if (v > best) {
        best = v;
        chosen = i;
      }
    }
    const double realized = (continuous ? utility(truth[chosen]) : best) - cost;
    sum += realized;
    sum_sq += realized * realized;
  }
  const double count = static_cast<double>(episodes);
  const double mean = sum / count;
  const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
  return {mean, std::sqrt(var / count)};
}

Theorem1Report check_theorem1(const IndependentBeliefs& beliefs, const MeasurementModel& model,
                              const UtilityFn& utility, int budget, const ObsGrid& grid,
                              std::size_t paths, std::uint64_t seed, const EstimatorSettings& settings) {
  if (beliefs.size() != 2 || (beliefs[0].known() == beliefs[1].known())) {
    throw std::invalid_argument("termination-bound check needs two items, exactly one of them known");
  }
  check_guard(beliefs, budget, grid);
  const std::size_t unknown = beliefs[0].known() ? 1 : 0;
  auto engine = make_engine(mix_key({seed, 0x7431}));
  std::normal_distribution<double> normal;

  Theorem1Report report;
  report.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < paths; ++p) {
    std::vector<double> truth{beliefs[0].mean, beliefs[1].mean};
    truth[unknown] += std::sqrt(beliefs[unknown].variance) * normal(engine);
    const Instance instance{truth, Beliefs(beliefs)};
    EstimatorSettings path_settings = settings;
    path_settings.seed = mix_key({seed, p});
    const auto episode = run_episode(instance, ConstraintFamily::kBlinkered, model, utility,
                                     ExecutionMode::kSingleStep, budget,
                                     ObservationStream(mix_key({seed, p, 0x0b5})), path_settings);

    IndependentBeliefs final_state = beliefs;
    for (const auto& t : episode.trace) {
      final_state[t.item] = posterior_update(final_state[t.item], model, 1, t.observation);
    }
    Theorem1Path path;
    path.remaining_budget = budget - episode.measurements;
    path.optimal_voi = optimal_plan_value(final_state, model, utility, path.remaining_budget, grid) -
                       select_value(final_state, utility);
    path.bound = path.remaining_budget * model.cost;
    path.margin = path.bound - path.optimal_voi;
    path.holds = path.optimal_voi <= path.bound + 1e-6;
    report.holds = report.holds && path.holds;
    report.min_margin = std::min(report.min_margin, path.margin);
    report.paths.push_back(path);
  }
  return report;
}

double SyntheticVoiInstance::joint_value(const std::vector<int>& allocation) const {
  double total = 0.0;
  double pair_sum = 0.0;
  double running = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double v = values[j][static_cast<std::size_t>(allocation[j])];
    total += v;
    pair_sum += running * v;
    running += v;
  }
  return total + synergy * pair_sum;
}

SyntheticVoiInstance tightness_instance(std::size_t n, int m, double k) {
  if (n < 1 || m < 1 || !(k > 0.0)) throw std::invalid_argument("invalid tightness parameters");
  SyntheticVoiInstance s{n, m, std::vector<std::vector<double>>(n, std::vector<double>(m + 1, 0.0)), 0.0};
  const double share = static_cast<double>(m) / static_cast<double>(n);
  const double plateau = std::pow(1.0 / static_cast<double>(n), 1.0 / k);
  for (int i = 0; i <= m; ++i) {
    s.values[0][i] = std::pow(static_cast<double>(i) / m, 1.0 / k);
    for (std::size_t j = 1; j < n; ++j) s.values[j][i] = i < share ? 0.0 : plateau;
  }
  return s;
}

namespace {

void for_each_allocation(std::size_t n, int m, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> a(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t j, int left) {
    if (j == n) {
      f(a);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      a[j] = k;
      rec(j + 1, left - k);
    }
    a[j] = 0;
  };
  rec(0, m);
}

// Greedy blinkered play on a synthetic instance; `stepwise` re-deliberates after each measurement.
double greedy_blinkered(const SyntheticVoiInstance& s, bool stepwise) {
  std::vector<int> a(s.n, 0);
  int left = s.m;
  const double start = s.joint_value(a);
  while (left > 0) {
    const double here = s.joint_value(a);
    double best_gain = kStopPreference;
    std::size_t best_item = s.n;
    int best_k = 0;
    for (std::size_t j = 0; j < s.n; ++j) {
      for (int k = 1; k <= left; ++k) {
        a[j] += k;
        const double gain = s.joint_value(a) - here;
        a[j] -= k;
        if (gain > best_gain + kStopPreference) {
          best_gain = gain;
          best_item = j;
          best_k = k;
        }
      }
    }
    if (best_item == s.n) break;
    const int take = stepwise ? 1 : best_k;
    a[best_item] += take;
    left -= take;
  }
  return s.joint_value(a) - start;
}

}  // namespace

Theorem2Report check_theorem2(const SyntheticVoiInstance& s) {
  if (s.n < 1 || s.m < 0 || s.values.size() != s.n) throw std::invalid_argument("malformed synthetic instance");
  for (const auto& v : s.values) {
    if (v.size() != static_cast<std::size_t>(s.m) + 1) throw std::invalid_argument("value table size must be m + 1");
    if (v[0] != 0.0) throw std::invalid_argument("value of zero measurements must be 0");
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] < v[i - 1]) throw std::invalid_argument("value-of-information functions must be non-decreasing");
    }
  }

  Theorem2Report r;
  const std::vector<int> none(s.n, 0);
  const double base = s.joint_value(none);
  for_each_allocation(s.n, s.m, [&](const std::vector<int>& a) {
    r.v_optimal = std::max(r.v_optimal, s.joint_value(a) - base);
  });

  // Pairwise check of V(M1 u M2) <= V(M1) + V(M2) over all measurement counts.
  for (std::size_t j = 0; j < s.n && r.mutually_submodular; ++j) {
    for (std::size_t l = j + 1; l < s.n && r.mutually_submodular; ++l) {
      for (int aj = 0; aj <= s.m && r.mutually_submodular; ++aj) {
        for (int al = 0; al <= s.m; ++al) {
          std::vector<int> a = none;
          a[j] = aj;
          const double vj = s.joint_value(a) - base;
          a[j] = 0;
          a[l] = al;
          const double vl = s.joint_value(a) - base;
          a[j] = aj;
          const double vjl = s.joint_value(a) - base;
          if (vjl > vj + vl + 1e-12) {
            r.mutually_submodular = false;
            break;
          }
        }
      }
    }
  }

  r.v_blinkered = greedy_blinkered(s, false);
  r.v_blinkered_stepwise = greedy_blinkered(s, true);
  if (r.v_blinkered > 0.0) {
    r.ratio = r.v_optimal / r.v_blinkered;
  } else {
    r.ratio = r.v_optimal > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  r.bound_holds = !r.mutually_submodular ||
                  r.v_blinkered >= r.v_optimal / static_cast<double>(s.n) - 1e-9;
  return r;
}

MonteCarloValue mc_batch_voi(const Beliefs& beliefs, const MeasurementModel& model,
                             const UtilityFn& utility, const Batch& batch, std::size_t samples,
                             std::uint64_t seed) {
  validate(model);
  const std::size_t n = beliefs.size();
  if (samples < 1000) throw std::invalid_argument("mc_batch_voi needs at least 1000 samples");
  if (batch.allocation.size() != n) throw std::invalid_argument("batch size does not match item count");
  for (std::size_t i = 0; i < n; ++i) {
    if (batch.allocation[i] > 0 && beliefs.known(i)) throw KnownItemMeasurement("batch measures a known item");
  }

  const auto nn = static_cast<Eigen::Index>(n);
  const auto cov = beliefs.covariance();
  Eigen::MatrixXd prior(nn, nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j < nn; ++j) prior(i, j) = cov[static_cast<std::size_t>(i * nn + j)];
  }
  Eigen::VectorXd mean(nn);
  for (Eigen::Index i = 0; i < nn; ++i) mean(i) = beliefs.marginals()[static_cast<std::size_t>(i)].mean;

  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (batch.allocation[i] > 0) rows.push_back(static_cast<Eigen::Index>(i));
  }
  const auto d = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, nn);
  Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    h(a, rows[static_cast<std::size_t>(a)]) = 1.0;
    noise(a, a) = model.noise_variance / batch.allocation[static_cast<std::size_t>(rows[static_cast<std::size_t>(a)])];
  }

  Eigen::MatrixXd posterior = prior;
  if (d > 0) {
    const Eigen::MatrixXd s = h * prior * h.transpose() + noise;
    posterior = prior - prior * h.transpose() * s.inverse() * h * prior;
  }
  Eigen::MatrixXd spread = prior - posterior;
  spread = 0.5 * (spread + spread.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spread);
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd factor = eig.eigenvectors() * roots.asDiagonal();

  double now = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) now = std::max(now, expected_utility(utility, beliefs.marginals()[i]));

  // Posterior variances are fixed, so each item's expected utility is a function of its mean alone.
  // Unmoved items are constants; tanh items, which are costly to integrate, are tabulated on a spline.
  const bool tabulate = std::holds_alternative<TanhUtility>(utility.variant());
  std::vector<double> fixed(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::optional<boost::math::interpolators::cardinal_cubic_b_spline<double>>> table(n);
  for (Eigen::Index i = 0; i < nn; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double var = std::max(0.0, posterior(i, i));
    const double spread_sd = factor.row(i).norm();
    if (spread_sd == 0.0) {
      fixed[k] = expected_utility(utility, GaussianBelief{mean(i), var});
    } else if (tabulate) {
      constexpr std::size_t kPoints = 4097;
      const double lo = mean(i) - 9.0 * spread_sd;
      const double step = 18.0 * spread_sd / static_cast<double>(kPoints - 1);
      std::vector<double> values(kPoints);
      for (std::size_t j = 0; j < kPoints; ++j) {
        values[j] = expected_utility(utility, GaussianBelief{lo + step * static_cast<double>(j), var});
      }
      table[k].emplace(values.begin(), values.end(), lo, step);
    }
  }
  auto item_value = [&](Eigen::Index i, double m) {
    const auto k = static_cast<std::size_t>(i);
    if (!std::isnan(fixed[k])) return fixed[k];
    if (table[k]) {
      const double lo = mean(i) - 9.0 * factor.row(i).norm();
      const double hi = 2.0 * mean(i) - lo;
      if (m > lo && m < hi) return (*table[k])(m);
    }
    return expected_utility(utility, GaussianBelief{m, std::max(0.0, posterior(i, i))});
  };

  auto engine = make_engine(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(nn);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < nn; ++i) z(i) = normal(engine);
    const Eigen::VectorXd m = mean + factor * z;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < nn; ++i) best = std::max(best, item_value(i, m(i)));
    const double gain = best - now;
    sum += gain;
    sum_sq += gain * gain;
  }
  const double count = static_cast<double>(samples);
  const double mu = sum / count;
  const double var = std::max(0.0, (sum_sq - count * mu * mu) / (count - 1.0));
  return {mu, std::sqrt(var / count)};
}

}  // namespace semimyopic::oracle
