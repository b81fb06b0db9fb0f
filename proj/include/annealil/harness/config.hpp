#pragma once

#include "annealil/envsim.hpp"
#include "annealil/imitation/losses.hpp"
#include "annealil/imitation/trainer.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace annealil::harness {

enum class Algorithm {
  bc,
  gail,
  bcgail_annealed,
  bcgail_fixed,
  bc_pretrain_gail,
  random_reward_ablation,
  reinforce,
};

const char* algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything one experiment needs. Serialized as a flat JSON object whose
/// keys match the field names.
struct TrainConfig {
  EnvSpec env;
  Algorithm algorithm = Algorithm::bcgail_annealed;
  std::string label;  ///< display name in comparisons; defaults to the algorithm

  double alpha = 0.5;  ///< bcgail_fixed only
  int half_life = 10;
  imitation::DiscMode disc_mode;

  double gamma = 0.99;
  double gae_lambda = 0.0;
  double lr = 3e-4;
  double disc_lr = 3e-4;
  int num_envs = 8;
  int steps_per_env = 128;
  int disc_steps = 1;
  int disc_batch = 0;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  double ppo_clip = 0.0;
  int epochs = 1;
  int minibatches = 1;
  std::vector<int> hidden = {64, 64};

  long total_env_steps = 1'000'000;
  int eval_every = 10;  ///< iterations (epochs for bc)
  int eval_episodes = 20;

  int bc_batch_size = 64;
  int bc_max_epochs = 200;
  int bc_patience = 10;
  double bc_lr = 1e-3;
  int disc_pretrain_iterations = 10;

  double threshold = 0.9;  ///< steps-to-threshold target on smoothed eval return
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::string dataset;
  std::string out;

  int rollout_size() const { return num_envs * steps_per_env; }
  long num_iterations() const;
  std::string display_label() const;
  bool needs_dataset() const { return algorithm != Algorithm::reinforce; }
};

/// Per-environment defaults (desk-scale budgets and hyperparameters).
TrainConfig default_config(const EnvSpec& env);

nlohmann::json to_json(const TrainConfig& config);
/// Applies every key present in `j` on top of `base`; unknown keys are errors.
TrainConfig apply_json(TrainConfig base, const nlohmann::json& j);
TrainConfig load_config(const std::filesystem::path& path);

/// Structural checks that must pass before any compute starts.
void validate(const TrainConfig& config);

imitation::TrainerConfig trainer_config(const TrainConfig& config, std::uint64_t seed);

/// Resolves a relative output path under $ANNEALIL_OUT_ROOT when it is set.
std::filesystem::path resolve_out(const std::string& out);

}  // namespace annealil::harness
