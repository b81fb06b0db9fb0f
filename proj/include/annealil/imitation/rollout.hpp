#pragma once

#include "annealil/envsim.hpp"
#include "annealil/imitation/losses.hpp"

#include <Eigen/Dense>

#include <vector>

namespace annealil::imitation {

/// On-policy steps laid out segment by segment. A segment ends at an episode
/// boundary or where collection stopped; `bootstrap[i]` is only read at
/// segment ends and must be 0 for terminal steps.
struct RolloutBuffer {
  std::vector<Observation> obs;
  std::vector<Action> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;      ///< reward the learner optimizes (surrogate or task)
  std::vector<double> env_rewards;  ///< true task reward, for reporting
  std::vector<char> terminal;       ///< done and not truncated
  std::vector<char> segment_end;
  std::vector<double> bootstrap;

  std::size_t size() const { return obs.size(); }
  void push(Observation o, Action a, double log_prob, double value, double env_reward);
  /// Marks the most recent step as the end of a segment.
  void close_segment(bool is_terminal, double bootstrap_value);

  /// Throws if arrays disagree in length, the last segment is open, or a
  /// terminal step carries a nonzero bootstrap.
  void validate() const;
  SampleBatch samples() const;
};

struct AdvantageEstimate {
  Eigen::VectorXd advantages;
  Eigen::VectorXd value_targets;
};

/// GAE over the one-step terms r_t + gamma * V(s_{t+1}) - V(s_t). With
/// lambda = 0 each advantage is exactly that one-step term.
AdvantageEstimate compute_advantages(const RolloutBuffer& buffer, double gamma, double lambda);

/// Shifts to zero mean and scales to unit (population) standard deviation.
Eigen::VectorXd normalize_advantages(const Eigen::VectorXd& advantages);

}  // namespace annealil::imitation
