#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace semimyopic::cli {

namespace {

// Keys with an empty default are required by the commands that read them.
const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"problem.n", ""},
      {"problem.budget", "5"},
      {"problem.known_item_index", "none"},
      {"problem.known_item_value", "1"},
      {"problem.prior_mean", "0"},
      {"problem.prior_variance", "1"},
      {"problem.dependency_kind", "none"},
      {"problem.drift_variance", "1"},
      {"problem.chain_form", "anchored"},
      {"measurement.noise_variance", "5"},
      {"measurement.cost", "0.00144"},
      {"utility.kind", "step"},
      {"utility.threshold", "1"},
      {"utility.low", "0"},
      {"utility.mid", "0.5"},
      {"utility.high", "1"},
      {"utility.scale", "1"},
      {"utility.shift", "0"},
      {"utility.knots", "0:0,1:1"},
      {"scheme.family", "blinkered"},
      {"scheme.execution_mode", "single_step"},
      {"scheme.bisection", "false"},
      {"estimator.quadrature_tolerance", "1e-8"},
      {"estimator.mc_samples", "10000"},
      {"estimator.enumeration_limit", "2000000"},
      {"experiment.sigma_o2_list", "3,4,5,6"},
      {"experiment.cost_list", "0.0005,0.001,0.0015,0.002"},
      {"experiment.replicates", "100"},
      {"experiment.ratio_list", "0,0.1,0.25,0.5,1,2,4"},
      {"experiment.seed", ""},
      {"output.directory", "out"},
      {"output.formats", "csv"},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

double parse_number(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ConfigError(key + ": expected a finite number, got '" + text + "'");
  }
  return value;
}

}  // namespace

Config::Config() {
  for (const auto& [key, value] : defaults()) {
    if (!value.empty()) values_[key] = value;
  }
}

const std::vector<std::string>& Config::known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& entry : defaults()) k.push_back(entry.first);
    return k;
  }();
  return keys;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  Config config;
  config.parse(text.str(), path);
  return config;
}

void Config::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(origin + ":" + std::to_string(number) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.find('.') == std::string::npos && !section.empty()) key = section + "." + key;
    set(key, trim(line.substr(eq + 1)));
  }
}

void Config::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(key + ": unknown key");
  values_[key] = value;
}

void Config::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key + ": required key is missing");
  return it->second;
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

long long Config::get_int(const std::string& key, long long min, long long max) const {
  const std::string& text = raw(key);
  long long value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    // Accept integral scientific notation such as 2e6.
    const double d = parse_number(key, text);
    if (d != std::floor(d) || d < static_cast<double>(std::numeric_limits<long long>::min()) ||
        d > static_cast<double>(std::numeric_limits<long long>::max())) {
      throw ConfigError(key + ": expected an integer, got '" + text + "'");
    }
    value = static_cast<long long>(d);
  }
  if (value < min || value > max) {
    throw ConfigError(key + ": value " + text + " outside [" + std::to_string(min) + ", " + std::to_string(max) + "]");
  }
  return value;
}

std::uint64_t Config::get_seed() const {
  const std::string& text = raw("experiment.seed");
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError("experiment.seed: expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

double Config::get_double(const std::string& key) const { return parse_number(key, raw(key)); }

bool Config::get_bool(const std::string& key) const {
  const std::string& text = raw(key);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& part : split(raw(key), ',')) out.push_back(parse_number(key, part));
  if (out.empty()) throw ConfigError(key + ": list must not be empty");
  return out;
}

std::vector<std::string> Config::get_string_list(const std::string& key) const {
  auto parts = split(raw(key), ',');
  parts.erase(std::remove(parts.begin(), parts.end(), std::string{}), parts.end());
  if (parts.empty()) throw ConfigError(key + ": list must not be empty");
  return parts;
}

UtilityFn utility(const Config& c) {
  const std::string kind = c.get_string("utility.kind");
  try {
    if (kind == "step") {
      return StepUtility{c.get_double("utility.threshold"), c.get_double("utility.low"),
                         c.get_double("utility.mid"), c.get_double("utility.high")};
    }
    if (kind == "tanh") return TanhUtility{c.get_double("utility.scale"), c.get_double("utility.shift")};
    if (kind == "piecewise_linear") {
      PiecewiseLinearUtility pl;
      for (const auto& knot : split(c.get_string("utility.knots"), ',')) {
        const auto colon = knot.find(':');
        if (colon == std::string::npos) throw ConfigError("utility.knots: expected x:u pairs, got '" + knot + "'");
        pl.knots.emplace_back(parse_number("utility.knots", trim(knot.substr(0, colon))),
                              parse_number("utility.knots", trim(knot.substr(colon + 1))));
      }
      return pl;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("utility." + std::string(kind == "tanh" ? "scale" : kind == "step" ? "threshold" : "knots") +
                      ": " + e.what());
  }
  throw ConfigError("utility.kind: expected step, tanh or piecewise_linear, got '" + kind + "'");
}

InstanceSpec instance_spec(const Config& c) {
  InstanceSpec spec;
  spec.n = static_cast<std::size_t>(c.get_int("problem.n", 1, 1'000'000));
  spec.prior_mean = c.get_double("problem.prior_mean");
  spec.prior_variance = c.get_double("problem.prior_variance");
  if (!(spec.prior_variance > 0.0)) throw ConfigError("problem.prior_variance: must be positive");

  const std::string known = c.get_string("problem.known_item_index");
  if (known != "none") {
    const auto index = c.get_int("problem.known_item_index", 0, static_cast<long long>(spec.n) - 1);
    spec.known_item = KnownItem{static_cast<std::size_t>(index), c.get_double("problem.known_item_value")};
  }

  const std::string dep = c.get_string("problem.dependency_kind");
  if (dep == "chain") {
    spec.dependency = DependencyKind::kChain;
  } else if (dep != "none") {
    throw ConfigError("problem.dependency_kind: expected none or chain, got '" + dep + "'");
  }
  spec.drift_variance = c.get_double("problem.drift_variance");
  if (!(spec.drift_variance > 0.0)) throw ConfigError("problem.drift_variance: must be positive");
  const std::string form = c.get_string("problem.chain_form");
  if (form == "random_walk") {
    spec.chain_form = ChainForm::kRandomWalk;
  } else if (form != "anchored") {
    throw ConfigError("problem.chain_form: expected anchored or random_walk, got '" + form + "'");
  }
  if (spec.known_item && spec.dependency == DependencyKind::kChain) {
    throw ConfigError("problem.known_item_index: a known item cannot be combined with chain dependencies");
  }
  spec.utility = utility(c);
  return spec;
}

MeasurementModel measurement_model(const Config& c) {
  MeasurementModel m{c.get_double("measurement.noise_variance"), c.get_double("measurement.cost")};
  if (!(m.noise_variance > 0.0)) throw ConfigError("measurement.noise_variance: must be positive");
  if (m.cost < 0.0) throw ConfigError("measurement.cost: must be non-negative");
  return m;
}

std::vector<ConstraintFamily> families(const Config& c) {
  std::vector<ConstraintFamily> out;
  for (const auto& name : c.get_string_list("scheme.family")) {
    try {
      out.push_back(parse_family(name));
    } catch (const std::invalid_argument&) {
      throw ConfigError("scheme.family: unknown family '" + name +
                        "' (expected myopic, blinkered, omni-myopic or exhaustive)");
    }
  }
  return out;
}

ExecutionMode execution_mode(const Config& c) {
  try {
    return parse_execution_mode(c.get_string("scheme.execution_mode"));
  } catch (const std::invalid_argument&) {
    throw ConfigError("scheme.execution_mode: expected single_step or whole_batch, got '" +
                      c.get_string("scheme.execution_mode") + "'");
  }
}

EstimatorSettings estimator(const Config& c) {
  EstimatorSettings s;
  s.quadrature_tolerance = c.get_double("estimator.quadrature_tolerance");
  if (!(s.quadrature_tolerance > 0.0)) throw ConfigError("estimator.quadrature_tolerance: must be positive");
  s.mc_samples = static_cast<std::size_t>(c.get_int("estimator.mc_samples", 1, 100'000'000));
  s.enumeration_limit = static_cast<std::size_t>(c.get_int("estimator.enumeration_limit", 1, 1'000'000'000'000));
  s.bisection = c.get_bool("scheme.bisection");
  return s;
}

}  // namespace semimyopic::cli
