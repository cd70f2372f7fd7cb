#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "semimyopic/belief.hpp"
#include "semimyopic/format.hpp"
#include "semimyopic/rng.hpp"
#include "semimyopic/simharness.hpp"
#include "semimyopic/verify.hpp"
#include "semimyopic/voi.hpp"

#ifndef SEMIMYOPIC_VERSION
#define SEMIMYOPIC_VERSION "0.0.0"
#endif

namespace semimyopic::cli {

namespace fs = std::filesystem;

namespace {

Config resolve_config(const Options& o) {
  Config config;
  if (o.manifest_path) {
    std::ifstream in(*o.manifest_path);
    if (!in) throw ConfigError("cannot read manifest '" + *o.manifest_path + "'");
    nlohmann::json manifest;
    try {
      in >> manifest;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("manifest '" + *o.manifest_path + "' is not valid JSON: " + e.what());
    }
    if (!manifest.contains("config") || !manifest["config"].is_object()) {
      throw ConfigError("manifest '" + *o.manifest_path + "' has no config object");
    }
    for (const auto& [key, value] : manifest["config"].items()) config.set(key, value.get<std::string>());
  } else if (o.config_path) {
    config = Config::from_file(*o.config_path);
  }
  for (const auto& a : o.assignments) config.set_assignment(a);
  if (o.seed) config.set("experiment.seed", std::to_string(*o.seed));
  if (o.out_dir) config.set("output.directory", *o.out_dir);
  if (o.scheme) config.set("scheme.family", *o.scheme);
  if (o.format) config.set("output.formats", *o.format);
  for (const auto& f : config.get_string_list("output.formats")) {
    if (f != "csv") throw ConfigError("output.formats: only csv is supported, got '" + f + "'");
  }
  return config;
}

std::size_t thread_count(const Options& o) {
  if (o.threads) return std::max<std::size_t>(1, *o.threads);
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Writes to a temporary sibling and renames it into place.
void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

class OutputDir {
 public:
  explicit OutputDir(const Config& config) : dir_(config.get_string("output.directory")) {
    fs::create_directories(dir_);
  }

  /// The manifest lists every result file and lands before any of them.
  void write_manifest(const std::string& command, const Config& config, const std::vector<std::string>& files) const {
    nlohmann::ordered_json m;
    m["tool"] = "semimyopic";
    m["version"] = SEMIMYOPIC_VERSION;
    m["command"] = command;
    m["created_at"] = utc_timestamp();
    if (config.has("experiment.seed")) {
      m["master_seed"] = config.get_seed();
    } else {
      m["master_seed"] = nullptr;
    }
    nlohmann::ordered_json resolved = nlohmann::ordered_json::object();
    for (const auto& [key, value] : config.resolved()) resolved[key] = value;
    m["config"] = resolved;
    m["outputs"] = files;
    write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
  }

  void write(const std::string& name, const std::string& content) const { write_atomic(dir_ / name, content); }
  fs::path path(const std::string& name) const { return dir_ / name; }

 private:
  fs::path dir_;
};

int budget_of(const Config& c) { return static_cast<int>(c.get_int("problem.budget", 0, 1'000'000)); }

int cmd_episode(const Options& o, const Config& c, std::ostream& out) {
  const auto spec = instance_spec(c);
  const auto model = measurement_model(c);
  const auto schemes = families(c);
  const auto mode = execution_mode(c);
  auto settings = estimator(c);
  const int budget = budget_of(c);
  const std::uint64_t seed = c.get_seed();
  const OutputDir dir(c);

  const Instance instance = generate_instance(spec, mix_key({seed, 0, 0, 1}));
  const ObservationStream stream(mix_key({seed, 0, 0, 2}));
  settings.seed = mix_key({seed, 0, 0, 3});

  std::vector<EpisodeRecord> records;
  std::ostringstream trace;
  for (const auto family : schemes) {
    auto result = run_episode(instance, family, model, spec.utility, mode, budget, stream, settings);
    trace << "# scheme=" << to_string(family) << " selected=" << result.selected
          << " measurements=" << result.measurements << " net_utility=" << format_double(result.net_utility)
          << " regret=" << format_double(result.regret) << '\n';
    write_trace(trace, result.trace);
    records.push_back({family, 0, spec.n, budget, model.noise_variance, model.cost, 0, std::move(result)});
  }
  std::ostringstream csv;
  write_episode_csv(csv, records);

  dir.write_manifest(o.command, c, {"episode.csv", "trace.txt"});
  dir.write("episode.csv", csv.str());
  dir.write("trace.txt", trace.str());
  out << trace.str();
  return kExitOk;
}

int cmd_voi_curve(const Options& o, const Config& c, std::ostream& out) {
  const auto spec = instance_spec(c);
  const auto model = measurement_model(c);
  const auto settings = estimator(c);
  const Beliefs beliefs = prior_beliefs(spec);

  std::size_t item = 0;
  if (o.item) {
    item = *o.item;
    if (item >= spec.n) throw ConfigError("--item: index " + std::to_string(item) + " out of range");
  } else {
    while (item < spec.n && beliefs.known(item)) ++item;
    if (item == spec.n) throw ConfigError("problem: every item is exactly known");
  }
  if (beliefs.known(item)) {
    throw ConfigError("--item: item " + std::to_string(item) + " is exactly known and cannot be measured");
  }
  const int k_max = o.k_max ? *o.k_max : budget_of(c);
  if (k_max < 1) throw ConfigError("--k-max: must be at least 1");

  std::ostringstream csv;
  csv << "k,intrinsic,cost,net\n";
  for (int k = 1; k <= k_max; ++k) {
    const auto e = mvi_k(beliefs, model, spec.utility, item, k, settings);
    csv << k << ',' << format_double(e.intrinsic) << ',' << format_double(e.cost) << ',' << format_double(e.net)
        << '\n';
  }
  const OutputDir dir(c);
  dir.write_manifest(o.command, c, {"voi_curve.csv"});
  dir.write("voi_curve.csv", csv.str());
  out << csv.str();
  return kExitOk;
}

int cmd_grid(const Options& o, const Config& c, std::ostream& out, std::ostream& err) {
  const auto spec = instance_spec(c);
  GridSpec grid;
  grid.sigma_o2 = c.get_double_list("experiment.sigma_o2_list");
  grid.costs = c.get_double_list("experiment.cost_list");
  for (double v : grid.sigma_o2) {
    if (!(v > 0.0)) throw ConfigError("experiment.sigma_o2_list: values must be positive");
  }
  for (double v : grid.costs) {
    if (v < 0.0) throw ConfigError("experiment.cost_list: values must be non-negative");
  }
  grid.budget = budget_of(c);
  grid.replicates = static_cast<int>(c.get_int("experiment.replicates", 1, 10'000'000));
  grid.schemes = families(c);
  grid.mode = execution_mode(c);
  grid.master_seed = c.get_seed();
  grid.estimator = estimator(c);
  grid.threads = thread_count(o);
  const OutputDir dir(c);

  dir.write_manifest(o.command, c, {"episodes.csv", "summary.csv"});
  const auto result = run_grid(grid, spec);
  std::size_t failed = 0;
  for (const auto& cell : result.cells) {
    if (cell.error) {
      ++failed;
      err << "warning: cell sigma_o2=" << format_double(cell.sigma_o2) << " cost=" << format_double(cell.cost)
          << " failed: " << *cell.error << '\n';
    }
  }
  std::ostringstream episodes;
  std::ostringstream summary;
  write_episode_csv(episodes, result.episodes);
  write_summary_csv(summary, result.cells);
  dir.write("episodes.csv", episodes.str());
  dir.write("summary.csv", summary.str());
  out << summary.str();
  if (failed == result.cells.size()) {
    err << "error: every cell failed\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_sweep(const Options& o, const Config& c, std::ostream& out) {
  const auto spec = instance_spec(c);
  if (spec.dependency != DependencyKind::kChain) {
    throw ConfigError("problem.dependency_kind: sweep-dependency requires chain");
  }
  const auto model = measurement_model(c);
  SweepSpec sweep;
  sweep.ratios = c.get_double_list("experiment.ratio_list");
  for (double r : sweep.ratios) {
    if (r < 0.0) throw ConfigError("experiment.ratio_list: ratios must be non-negative");
  }
  sweep.sigma_o2 = model.noise_variance;
  sweep.cost = model.cost;
  sweep.budget = budget_of(c);
  sweep.replicates = static_cast<int>(c.get_int("experiment.replicates", 1, 10'000'000));
  sweep.master_seed = c.get_seed();
  sweep.estimator = estimator(c);
  sweep.threads = thread_count(o);
  sweep.mode = execution_mode(c);
  const OutputDir dir(c);

  dir.write_manifest(o.command, c, {"sweep.csv", "episodes.csv"});
  const auto result = dependency_sweep(spec, sweep);
  std::ostringstream points;
  std::ostringstream episodes;
  write_sweep_csv(points, result.points);
  write_episode_csv(episodes, result.episodes);
  dir.write("sweep.csv", points.str());
  dir.write("episodes.csv", episodes.str());
  out << points.str();
  return kExitOk;
}

int cmd_verify(const Options& o, const Config& c, std::ostream& out) {
  verify::Options vo;
  if (c.has("experiment.seed")) vo.seed = c.get_seed();
  vo.inject_accounting_fault = o.inject_fault;
  if (o.quick) {
    vo.theorem1_instances = 5;
    vo.theorem1_paths = 20;
    vo.theorem2_instances = 20;
    vo.mc_instances = 5;
    vo.mc_samples = 100'000;
    vo.chain_instances = 10;
  }
  const OutputDir dir(c);
  dir.write_manifest(o.command, c, {"verify_report.txt"});
  const auto report = verify::run_all(vo);
  std::ostringstream text;
  verify::write_report(text, report);
  dir.write("verify_report.txt", text.str());
  out << text.str();
  return report.passed() ? kExitOk : kExitFailure;
}

}  // namespace

int run(const Options& o, std::ostream& out, std::ostream& err) {
  try {
    const Config config = resolve_config(o);
    if (o.command == "episode") return cmd_episode(o, config, out);
    if (o.command == "voi-curve") return cmd_voi_curve(o, config, out);
    if (o.command == "grid") return cmd_grid(o, config, out, err);
    if (o.command == "sweep-dependency") return cmd_sweep(o, config, out);
    if (o.command == "verify") return cmd_verify(o, config, out);
    err << "error: unknown command '" << o.command << "'\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const KnownItemMeasurement& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace semimyopic::cli
