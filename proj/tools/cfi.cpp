#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cfi/commands.hpp"

namespace {

void add_common(CLI::App* cmd, cfi::cli::CommonOptions& o) {
  cmd->add_option("--config", o.config, "Scenario config file (JSON)")->required();
  cmd->add_option("--strategy", o.strategy, "Override the merge strategy: consistent | naive | spot-labeling");
  cmd->add_option("--threads", o.threads, "Worker threads, 0 = all cores (results do not depend on it)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual interleaving toolkit for producer-side ranking experiments"};
  app.require_subcommand(1);

  cfi::cli::MergeOptions merge;
  auto* merge_cmd = app.add_subcommand("merge", "Draw one assignment and write the merged ranking");
  add_common(merge_cmd, merge.common);
  merge_cmd->add_option("--seed", merge.seed, "Random seed (default: config seed, else 0)");
  merge_cmd->add_option("--out", merge.out, "Output CSV path (default: stdout)");

  cfi::cli::KernelsOptions kernels;
  auto* kernels_cmd = app.add_subcommand("kernels", "Compute convolution kernels and convolved attention");
  add_common(kernels_cmd, kernels.common);
  kernels_cmd->add_option("--mode", kernels.mode, "exact | mc")->capture_default_str();
  kernels_cmd->add_option("--samples", kernels.samples, "Monte Carlo samples")->capture_default_str();
  kernels_cmd->add_option("--seed", kernels.seed, "Monte Carlo seed (default: config seed, else 0)");
  kernels_cmd->add_option("--out", kernels.out, "Output directory for CSV files (default: stdout)");

  cfi::cli::CheckOptions check;
  auto* check_cmd = app.add_subcommand("check", "Check consistency and monotonicity of the merged ranker");
  add_common(check_cmd, check.common);
  check_cmd->add_option("--mode", check.mode, "exact | mc")->capture_default_str();
  check_cmd->add_option("--samples", check.samples, "Monte Carlo samples")->capture_default_str();
  check_cmd->add_option("--seed", check.seed, "Monte Carlo seed");
  check_cmd->add_option("--tolerance", check.tolerance, "Consistency tolerance")->capture_default_str();

  cfi::cli::SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Replicate the experiment and report readout statistics");
  add_common(sim_cmd, sim.common);
  sim_cmd->add_option("--replications", sim.replications, "Number of replications (default: config, else 100000)");
  sim_cmd->add_option("--seed", sim.seed, "Master seed (default: config seed, else 0)");
  sim_cmd->add_option("--out", sim.out, "Output path (default: stdout)");
  sim_cmd->add_option("--format", sim.format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cfi::cli::kUsageError;
  }

  if (*merge_cmd) return cfi::cli::cmd_merge(merge, std::cout, std::cerr);
  if (*kernels_cmd) return cfi::cli::cmd_kernels(kernels, std::cout, std::cerr);
  if (*check_cmd) return cfi::cli::cmd_check(check, std::cout, std::cerr);
  if (*sim_cmd) return cfi::cli::cmd_simulate(sim, std::cout, std::cerr);
  return cfi::cli::kUsageError;
}
