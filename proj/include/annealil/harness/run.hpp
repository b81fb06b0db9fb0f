#pragma once

#include "annealil/expert.hpp"
#include "annealil/harness/config.hpp"
#include "annealil/harness/evaluate.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace annealil::harness {

struct SeedOutcome {
  std::uint64_t seed = 0;
  SeedEval final_eval;
  std::optional<double> post_bc_return;  ///< bc_pretrain_gail only
};

/// Trains one seed into `dir` (metrics.csv, policy.ckpt, eval.json).
SeedOutcome run_seed(const TrainConfig& config, const Dataset* dataset, std::uint64_t seed,
                     const std::filesystem::path& dir);

/// Validates the config, then runs every seed. The run directory holds
/// config.json, eval_report.json and one seed_<n>/ directory per seed.
std::filesystem::path run(const TrainConfig& config);

/// Expert trajectory count used for each gridworld size.
int expert_trajectories_for(int grid_size);

/// Collects (and saves) an expert dataset with the scripted expert of `env`.
Dataset collect_expert(const EnvSpec& env, int n_trajectories, std::uint64_t seed);

struct BundleOptions {
  int grid_size = 8;
  std::uint64_t base_seed = 0;
  int num_seeds = 3;
  std::filesystem::path out_root = "runs/bundle";
  std::string dataset;                       ///< reuse instead of collecting
  std::optional<nlohmann::json> overrides;   ///< applied to every run config
  std::vector<std::string> labels;           ///< subset of the bundle's runs; empty = all
};

/// Named experiment bundles: "gridworld", "annealing-sweep", "random-reward".
/// Returns the run directories in bundle order.
std::vector<std::filesystem::path> reproduce(const std::string& bundle, const BundleOptions& options);

/// Path of the bundle's expert data; collects and saves it under out_root
/// unless options.dataset names an existing file.
std::string prepare_bundle_dataset(const std::string& bundle, const BundleOptions& options);

/// The run configurations of a bundle, without executing them.
std::vector<TrainConfig> bundle_configs(const std::string& bundle, const BundleOptions& options,
                                        const std::string& dataset_path);

}  // namespace annealil::harness
