#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using semimyopic::cli::Options;
  CLI::App app{"Measurement-selection value-of-information simulator"};
  app.require_subcommand(1);
  Options options;

  auto add_common = [&options](CLI::App* sub) {
    sub->add_option("--config", options.config_path, "Configuration file (sectioned key=value)");
    sub->add_option("--manifest", options.manifest_path, "Re-run with the configuration stored in a manifest");
    sub->add_option("--seed", options.seed, "Master seed (experiment.seed)");
    sub->add_option("--out", options.out_dir, "Output directory (output.directory)");
    sub->add_option("--scheme", options.scheme, "Constraint family or comma list (scheme.family)");
    sub->add_option("--threads", options.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", options.format, "Output format (csv)");
    sub->add_option("--set", options.assignments, "Override a configuration key: key=value");
  };

  auto* episode = app.add_subcommand("episode", "Run one episode per scheme and write its trace");
  auto* curve = app.add_subcommand("voi-curve", "Intrinsic value, cost and net value per measurement count");
  auto* grid = app.add_subcommand("grid", "Paired regret experiment over (noise variance, cost) cells");
  auto* sweep = app.add_subcommand("sweep-dependency", "Blinkered versus omni-myopic across dependency strengths");
  auto* verify = app.add_subcommand("verify", "Run the oracle verification suite");
  for (auto* sub : {episode, curve, grid, sweep, verify}) add_common(sub);
  curve->add_option("--item", options.item, "Item to measure (default: first unknown item)");
  curve->add_option("--k-max", options.k_max, "Largest measurement count (default: problem.budget)");
  verify->add_flag("--quick", options.quick, "Fewer instances and samples per check");
  verify->add_flag("--inject-fault", options.inject_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return semimyopic::cli::kExitUsage;
  }
  options.command = app.get_subcommands().front()->get_name();
  return semimyopic::cli::run(options, std::cout, std::cerr);
}
