#pragma once

#include "annealil/envsim.hpp"
#include "annealil/expert.hpp"
#include "annealil/imitation/losses.hpp"
#include "annealil/imitation/rollout.hpp"
#include "annealil/imitation/schedule.hpp"
#include "annealil/neural/adam.hpp"
#include "annealil/random.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace annealil::imitation {

enum class RewardSource { discriminator, environment };

struct TrainerConfig {
  EnvSpec env;
  std::vector<int> hidden = {64, 64};
  int num_envs = 8;
  int steps_per_env = 128;  ///< rollout size = num_envs * steps_per_env

  RewardSource reward_source = RewardSource::discriminator;
  AnnealSchedule schedule = AnnealSchedule::annealed(10);
  DiscMode disc_mode;
  bool disc_frozen = false;
  int disc_steps = 1;
  int disc_batch = 0;  ///< 0 = whole rollout
  double disc_lr = 3e-4;

  double gamma = 0.99;
  double gae_lambda = 0.0;
  double lr = 3e-4;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  double ppo_clip = 0.0;
  int epochs = 1;
  int minibatches = 1;

  std::uint64_t seed = 0;

  int rollout_size() const { return num_envs * steps_per_env; }
};

struct IterationMetrics {
  long iteration = 0;
  long env_steps = 0;  ///< cumulative, including this iteration's rollout
  double alpha = 0.0;
  double bc_loss = 0.0;
  double pg_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double disc_loss = 0.0;
  double mean_surrogate_reward = 0.0;
  double mean_episode_return = 0.0;  ///< NaN when no episode finished
  int episodes_completed = 0;
};

/// All expert (s, a) pairs of a dataset as one column-wise batch.
SampleBatch to_batch(const Dataset& dataset);

/// Annealed BC + adversarial imitation learner and its baselines. Owns the
/// policy/value network, the discriminator, their optimizers and a set of
/// persistent environment instances.
class Trainer {
 public:
  /// `expert` may be null only when rewards come from the environment.
  Trainer(TrainerConfig config, const Dataset* expert);

  /// Rollout, discriminator steps, advantages, combined update at alpha_t.
  IterationMetrics train_iteration(long t);

  /// Rollout plus discriminator steps only; the policy is left untouched.
  IterationMetrics discriminator_iteration(long t);

  const TrainerConfig& config() const { return config_; }
  Net& policy() { return policy_; }
  const Net& policy() const { return policy_; }
  Net& discriminator() { return disc_; }
  const Net& discriminator() const { return disc_; }
  long env_steps() const { return env_steps_; }
  const ActionSpec& action_spec() const { return action_spec_; }

  /// Batches fed to the most recent policy update (for inspection in tests).
  const PolicyBatch& last_policy_batch() const { return last_policy_batch_; }
  const SampleBatch& last_expert_batch() const { return last_expert_batch_; }
  const RolloutBuffer& last_rollout() const { return last_rollout_; }

 private:
  RolloutBuffer collect_rollout(IterationMetrics& metrics);
  double update_discriminator(const RolloutBuffer& buffer);
  void fill_rewards(RolloutBuffer& buffer);
  SampleBatch sample_expert(Eigen::Index n, Rng& rng) const;
  void update_policy(const RolloutBuffer& buffer, double alpha, IterationMetrics& metrics);

  TrainerConfig config_;
  ActionSpec action_spec_;
  SampleBatch expert_pool_;

  Net policy_;
  Net disc_;
  neural::AdamState<double> policy_opt_;
  neural::AdamState<double> disc_opt_;

  Rng rollout_rng_;
  Rng disc_rng_;
  Rng update_rng_;

  std::vector<std::unique_ptr<Environment>> envs_;
  std::vector<Observation> env_obs_;
  std::vector<double> env_returns_;
  std::uint64_t episodes_started_ = 0;
  long env_steps_ = 0;

  PolicyBatch last_policy_batch_;
  SampleBatch last_expert_batch_;
  RolloutBuffer last_rollout_;
};

// ---------------------------------------------------------------------------
// Supervised behavior cloning

struct BcConfig {
  int batch_size = 64;
  int max_epochs = 200;
  int patience = 10;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

struct BcEpoch {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct BcResult {
  std::vector<BcEpoch> history;
  int best_epoch = 0;
  double best_val_loss = 0.0;
};

/// Minibatch NLL training with early stopping on validation NLL; the policy
/// ends with the parameters of the best validation epoch.
BcResult train_bc(Net& policy, const Dataset& train, const Dataset& val, const BcConfig& config,
                  const std::function<void(const BcEpoch&, const Net&)>& on_epoch = {});

/// Fresh policy/value network for an environment, initialized from `seed`.
Net make_policy_net(int obs_dim, const ActionSpec& spec, const std::vector<int>& hidden, std::uint64_t seed);

}  // namespace annealil::imitation
