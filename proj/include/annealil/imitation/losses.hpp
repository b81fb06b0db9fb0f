#pragma once

#include "annealil/envsim.hpp"
#include "annealil/neural/network.hpp"

#include <Eigen/Dense>

namespace annealil::imitation {

using Net = neural::Network<double>;

/// State-action pairs stored column-wise. Discrete actions occupy one row
/// holding the action index.
struct SampleBatch {
  Eigen::MatrixXd obs;
  Eigen::MatrixXd actions;

  Eigen::Index size() const { return obs.cols(); }
  bool empty() const { return obs.cols() == 0; }
  SampleBatch gather(const std::vector<Eigen::Index>& columns) const;
};

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

enum class DiscVariant { gan, wgan };

struct DiscMode {
  DiscVariant variant = DiscVariant::gan;
  double clip = 0.01;  ///< weight clip bound, wgan only
};

/// Discriminator input: observation stacked on the action encoding (one-hot
/// for discrete actions, clamped to [-1, 1] for continuous ones).
Eigen::MatrixXd disc_input(const SampleBatch& batch, const ActionSpec& spec);
int disc_input_dim(int obs_dim, const ActionSpec& spec);

/// Per-sample log pi(a|s) for a batch forward pass.
Eigen::VectorXd batch_log_probs(const Net& policy, const Net::Forward& fwd, const Eigen::MatrixXd& actions);

/// Mean negative log-likelihood of the expert actions.
LossGrad bc_loss(const Net& policy, const SampleBatch& expert);

/// gan: -E_E[log D] - E_pi[log(1 - D)] with D = sigmoid(f).
/// wgan: E_pi[f] - E_E[f] on the raw critic output.
LossGrad disc_loss(const Net& disc, const SampleBatch& expert, const SampleBatch& policy, const DiscMode& mode,
                   const ActionSpec& spec);

/// Clamps every discriminator parameter into [-c, c].
void clip_weights(Net& disc, double c);

inline constexpr double kMaxGanReward = 20.0;

/// -log(1 - sigmoid(logit)) capped at kMaxGanReward (gan), or the logit itself (wgan).
double surrogate_from_logit(double logit, const DiscMode& mode);
Eigen::VectorXd surrogate_rewards(const Net& disc, const SampleBatch& batch, const DiscMode& mode,
                                  const ActionSpec& spec);

/// On-policy samples with the constants the policy update needs.
struct PolicyBatch {
  SampleBatch samples;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;     ///< already normalized
  Eigen::VectorXd value_targets;

  PolicyBatch gather(const std::vector<Eigen::Index>& columns) const;
};

struct PolicyLossConfig {
  double alpha = 0.0;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double ppo_clip = 0.0;  ///< 0 disables the clipped surrogate
};

struct PolicyLossTerms {
  double total = 0.0;
  double bc = 0.0;
  double pg = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  Eigen::VectorXd grad;
};

/// -E_pi[log pi(a|s) A] (or the PPO clipped form), advantages held constant.
LossGrad pg_loss(const Net& policy, const PolicyBatch& batch, double ppo_clip = 0.0);
/// E_pi[(V(s) - target)^2 / 2].
LossGrad value_loss(const Net& policy, const PolicyBatch& batch);
/// Mean policy entropy over the batch states (the bonus, not its negation).
LossGrad mean_entropy(const Net& policy, const Eigen::MatrixXd& obs);

/// alpha * L_BC + (1 - alpha) * L_P + value_coef * L_V - entropy_coef * H,
/// computed with one forward/backward pass per batch. An empty expert batch
/// drops the cloning term.
PolicyLossTerms policy_loss(const Net& policy, const PolicyBatch& batch, const SampleBatch& expert,
                            const PolicyLossConfig& config);

}  // namespace annealil::imitation
