#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semimyopic/policy.hpp"
#include "semimyopic/simharness.hpp"
#include "semimyopic/voi.hpp"

namespace semimyopic::cli {

/// Invalid configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sectioned key=value configuration. Keys are "section.name"; a file may
/// use [section] headers, dotted keys, or both. Lines starting with # are comments.
class Config {
 public:
  Config();

  static Config from_file(const std::string& path);
  void parse(const std::string& text, const std::string& origin = "<string>");

  /// Sets one key from "key=value" or (key, value); unknown keys are rejected.
  void set(const std::string& key, const std::string& value);
  void set_assignment(const std::string& assignment);

  bool has(const std::string& key) const;
  const std::string& raw(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  long long get_int(const std::string& key, long long min, long long max) const;
  std::uint64_t get_seed() const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  /// Every key with its resolved value, sorted.
  const std::map<std::string, std::string>& resolved() const { return values_; }

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
};

InstanceSpec instance_spec(const Config& config);
MeasurementModel measurement_model(const Config& config);
UtilityFn utility(const Config& config);
std::vector<ConstraintFamily> families(const Config& config);
ExecutionMode execution_mode(const Config& config);
EstimatorSettings estimator(const Config& config);

}  // namespace semimyopic::cli
