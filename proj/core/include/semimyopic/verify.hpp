#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace semimyopic::verify {

struct CheckResult {
  std::string name;
  bool passed = true;
  bool skipped = false;
  double margin = 0.0;  // distance to the failure boundary; negative when failed
  std::string detail;
};

struct Options {
  std::uint64_t seed = 0;
  std::size_t theorem1_instances = 50;
  std::size_t theorem1_paths = 100;
  std::size_t theorem2_instances = 200;
  std::size_t mc_instances = 50;
  std::size_t mc_samples = 1'000'000;
  std::size_t chain_instances = 100;
  /// Negative control: mis-bills one extra measurement in the accounting check.
  bool inject_accounting_fault = false;
};

/// s_1 known at the threshold, s_2 ~ N(0, 1), noise variance 5, step utility.
CheckResult check_pathological();
/// Intrinsic increments of repeated measurements of s_2 rise then fall.
CheckResult check_growth_shape(std::size_t k_max = 12);
CheckResult check_theorem1_suite(std::size_t instances, std::size_t paths, std::uint64_t seed);
CheckResult check_theorem1_pathological(std::uint64_t seed);
CheckResult check_theorem2_suite(std::size_t instances, std::uint64_t seed);
CheckResult check_tightness();
CheckResult check_quadrature_vs_mc(std::size_t instances, std::size_t samples, std::uint64_t seed);
CheckResult check_chain_vs_dense(std::size_t instances, std::uint64_t seed);
CheckResult check_accounting(bool inject_fault, std::uint64_t seed);
/// Exact planning above its guard; always reported as skipped.
CheckResult check_planning_guard();

struct Report {
  std::vector<CheckResult> checks;
  bool passed() const;
};

Report run_all(const Options& options);

/// One line per check: status, name, margin, detail.
void write_report(std::ostream& out, const Report& report);

}  // namespace semimyopic::verify
