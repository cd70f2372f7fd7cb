#include "semimyopic/simharness.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <stdexcept>
#include <thread>

#include "semimyopic/format.hpp"
#include "semimyopic/rng.hpp"

namespace semimyopic {

void validate(const InstanceSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("instance needs at least one item");
  if (!(spec.prior_variance > 0.0) || !std::isfinite(spec.prior_variance)) {
    throw std::invalid_argument("prior variance must be positive and finite");
  }
  if (!std::isfinite(spec.prior_mean)) throw std::invalid_argument("prior mean must be finite");
  if (spec.known_item) {
    if (spec.known_item->index >= spec.n) throw std::invalid_argument("known item index out of range");
    if (!std::isfinite(spec.known_item->value)) throw std::invalid_argument("known item value must be finite");
    if (spec.dependency == DependencyKind::kChain) {
      throw std::invalid_argument("chain dependencies do not support an exactly known item");
    }
  }
  if (spec.dependency == DependencyKind::kChain && !(spec.drift_variance > 0.0)) {
    throw std::invalid_argument("drift variance must be positive");
  }
}

namespace {

ChainBelief chain_prior(const InstanceSpec& spec) {
  return spec.chain_form == ChainForm::kAnchored
             ? ChainBelief::anchored(spec.n, spec.prior_mean, spec.prior_variance, spec.drift_variance)
             : ChainBelief::random_walk(spec.n, spec.prior_mean, spec.prior_variance, spec.drift_variance);
}

}  // namespace

Beliefs prior_beliefs(const InstanceSpec& spec) {
  validate(spec);
  if (spec.dependency == DependencyKind::kChain) return chain_prior(spec);
  IndependentBeliefs beliefs(spec.n, GaussianBelief{spec.prior_mean, spec.prior_variance});
  if (spec.known_item) beliefs[spec.known_item->index] = {spec.known_item->value, 0.0};
  return beliefs;
}

Instance generate_instance(const InstanceSpec& spec, std::uint64_t stream_key) {
  validate(spec);
  auto engine = make_engine(stream_key);
  std::normal_distribution<double> normal;

  if (spec.dependency == DependencyKind::kChain) {
    auto chain = chain_prior(spec);
    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto cov = chain.covariance();
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> sigma(
        cov.data(), n, n);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw std::domain_error("chain prior covariance not positive definite");
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(engine);
    const Eigen::VectorXd x = llt.matrixL() * z;
    std::vector<double> values(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) values[i] = chain.means()[i] + x(static_cast<Eigen::Index>(i));
    return Instance{std::move(values), Beliefs(std::move(chain))};
  }

  std::vector<double> values(spec.n);
  IndependentBeliefs beliefs(spec.n);
  const double sd = std::sqrt(spec.prior_variance);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double z = normal(engine);  // drawn for every item so keys stay aligned
    if (spec.known_item && spec.known_item->index == i) {
      beliefs[i] = {spec.known_item->value, 0.0};
      values[i] = spec.known_item->value;
    } else {
      beliefs[i] = {spec.prior_mean, spec.prior_variance};
      values[i] = spec.prior_mean + sd * z;
    }
  }
  return Instance{std::move(values), Beliefs(std::move(beliefs))};
}

namespace {

struct CellPlan {
  double sigma_o2;
  double cost;
  InstanceSpec spec;
};

struct RunPlan {
  std::vector<CellPlan> cells;
  std::vector<ConstraintFamily> schemes;
  int budget;
  int replicates;
  ExecutionMode mode;
  std::uint64_t master_seed;
  EstimatorSettings estimator;
  std::size_t threads;
};

struct UnitOutcome {
  std::vector<EpisodeResult> results;  // per scheme
  std::optional<std::string> error;
};

UnitOutcome run_unit(const RunPlan& plan, std::size_t cell, int replicate) {
  UnitOutcome out;
  try {
    const auto& c = plan.cells[cell];
    const auto r = static_cast<std::uint64_t>(replicate);
    const Instance instance = generate_instance(c.spec, mix_key({plan.master_seed, cell, r, 1}));
    const ObservationStream stream(mix_key({plan.master_seed, cell, r, 2}));
    EstimatorSettings settings = plan.estimator;
    settings.seed = mix_key({plan.master_seed, cell, r, 3});
    const MeasurementModel model{c.sigma_o2, c.cost};
    for (const auto family : plan.schemes) {
      out.results.push_back(
          run_episode(instance, family, model, c.spec.utility, plan.mode, plan.budget, stream, settings));
    }
  } catch (const std::exception& e) {
    out.results.clear();
    out.error = e.what();
  }
  return out;
}

double sample_sd(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

GridResult execute(const RunPlan& plan) {
  if (plan.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (plan.schemes.empty()) throw std::invalid_argument("at least one scheme is required");
  const std::size_t units = plan.cells.size() * static_cast<std::size_t>(plan.replicates);
  std::vector<UnitOutcome> outcomes(units);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t u = next++; u < units; u = next++) {
      outcomes[u] = run_unit(plan, u / plan.replicates, static_cast<int>(u % plan.replicates));
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(plan.threads, units));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  GridResult result;
  const std::size_t s_count = plan.schemes.size();
  for (std::size_t c = 0; c < plan.cells.size(); ++c) {
    CellStats stats;
    stats.cell = c;
    stats.sigma_o2 = plan.cells[c].sigma_o2;
    stats.cost = plan.cells[c].cost;
    stats.schemes = plan.schemes;
    std::vector<std::vector<double>> regrets(s_count);
    for (int r = 0; r < plan.replicates; ++r) {
      auto& o = outcomes[c * plan.replicates + r];
      if (o.error) {
        if (!stats.error) stats.error = *o.error;
        continue;
      }
      for (std::size_t s = 0; s < s_count; ++s) {
        regrets[s].push_back(o.results[s].regret);
        EpisodeRecord rec;
        rec.scheme = plan.schemes[s];
        rec.cell = c;
        rec.n = plan.cells[c].spec.n;
        rec.budget = plan.budget;
        rec.sigma_o2 = stats.sigma_o2;
        rec.cost = stats.cost;
        rec.replicate = r;
        rec.result = std::move(o.results[s]);
        result.episodes.push_back(std::move(rec));
      }
    }
    stats.replicates = static_cast<int>(regrets[0].size());
    for (std::size_t s = 0; s < s_count; ++s) {
      double sum = 0.0;
      for (double x : regrets[s]) sum += x;
      const double mean = regrets[s].empty() ? 0.0 : sum / static_cast<double>(regrets[s].size());
      stats.mean_regret.push_back(mean);
      stats.std_regret.push_back(sample_sd(regrets[s], mean));
    }
    for (std::size_t a = 0; a < s_count; ++a) {
      for (std::size_t b = a + 1; b < s_count; ++b) {
        std::vector<double> diffs(regrets[a].size());
        for (std::size_t i = 0; i < diffs.size(); ++i) diffs[i] = regrets[a][i] - regrets[b][i];
        PairStats p{plan.schemes[a], plan.schemes[b], stats.mean_regret[a] - stats.mean_regret[b], 0.0};
        p.std_diff = sample_sd(diffs, p.mean_diff);
        stats.pairs.push_back(p);
      }
    }
    result.cells.push_back(std::move(stats));
  }
  return result;
}

}  // namespace

GridResult run_grid(const GridSpec& grid, const InstanceSpec& spec) {
  validate(spec);
  RunPlan plan{{}, grid.schemes, grid.budget, grid.replicates, grid.mode, grid.master_seed,
               grid.estimator, grid.threads};
  for (double s : grid.sigma_o2) {
    for (double c : grid.costs) {
      validate(MeasurementModel{s, c});
      plan.cells.push_back({s, c, spec});
    }
  }
  return execute(plan);
}

SweepResult dependency_sweep(const InstanceSpec& base, const SweepSpec& sweep) {
  if (base.dependency != DependencyKind::kChain) {
    throw std::invalid_argument("dependency_sweep needs a chain dependency spec");
  }
  RunPlan plan{{},
               {ConstraintFamily::kBlinkered, ConstraintFamily::kOmniMyopic},
               sweep.budget,
               sweep.replicates,
               sweep.mode,
               sweep.master_seed,
               sweep.estimator,
               sweep.threads};
  std::vector<double> drifts;
  for (double ratio : sweep.ratios) {
    if (!(ratio >= 0.0)) throw std::invalid_argument("dependency ratio must be non-negative");
    InstanceSpec spec = base;
    spec.drift_variance = ratio == 0.0 ? kIndependentDriftVariance : sweep.sigma_o2 / ratio;
    validate(spec);
    drifts.push_back(spec.drift_variance);
    plan.cells.push_back({sweep.sigma_o2, sweep.cost, std::move(spec)});
  }
  auto grid = execute(plan);

  SweepResult out;
  out.episodes = std::move(grid.episodes);
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    SweepPoint p;
    p.ratio = sweep.ratios[i];
    p.drift_variance = drifts[i];
    // regret = max u - net utility and both schemes share the instance
    p.utility_difference = grid.cells[i].mean_regret[1] - grid.cells[i].mean_regret[0];
    p.stats = std::move(grid.cells[i]);
    out.points.push_back(std::move(p));
  }
  return out;
}

void write_episode_csv(std::ostream& out, const std::vector<EpisodeRecord>& episodes) {
  out << "scheme,n,budget,sigma_o2,cost,replicate,seed,selected,best,net_utility,regret,measurements\n";
  for (const auto& e : episodes) {
    out << to_string(e.scheme) << ',' << e.n << ',' << e.budget << ',' << format_double(e.sigma_o2) << ','
        << format_double(e.cost) << ',' << e.replicate << ',' << e.result.seed << ',' << e.result.selected
        << ',' << e.result.best << ',' << format_double(e.result.net_utility) << ','
        << format_double(e.result.regret) << ',' << e.result.measurements << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<CellStats>& cells) {
  out << "scheme_pair,sigma_o2,cost,mean_diff,std_diff,n_replicates\n";
  for (const auto& c : cells) {
    if (c.error) continue;
    for (const auto& p : c.pairs) {
      out << to_string(p.first) << "_vs_" << to_string(p.second) << ',' << format_double(c.sigma_o2) << ','
          << format_double(c.cost) << ',' << format_double(p.mean_diff) << ','
          << format_double(p.std_diff) << ',' << c.replicates << '\n';
    }
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  out << "ratio,drift_variance,mean_regret_blinkered,mean_regret_omni_myopic,utility_difference,"
         "std_diff,n_replicates\n";
  for (const auto& p : points) {
    if (p.stats.error) continue;
    out << format_double(p.ratio) << ',' << format_double(p.drift_variance) << ','
        << format_double(p.stats.mean_regret[0]) << ',' << format_double(p.stats.mean_regret[1]) << ','
        << format_double(p.utility_difference) << ',' << format_double(p.stats.pairs[0].std_diff) << ','
        << p.stats.replicates << '\n';
  }
}

}  // namespace semimyopic
