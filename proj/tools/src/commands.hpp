#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace semimyopic::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct Options {
  std::string command;
  std::optional<std::string> config_path;
  std::optional<std::string> manifest_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> scheme;
  std::optional<std::size_t> threads;
  std::optional<std::string> format;
  std::vector<std::string> assignments;  // key=value overrides
  std::optional<std::size_t> item;
  std::optional<int> k_max;
  bool inject_fault = false;
  bool quick = false;
};

/// Runs one subcommand and returns its exit code. Errors are reported on `err`.
int run(const Options& options, std::ostream& out, std::ostream& err);

}  // namespace semimyopic::cli
