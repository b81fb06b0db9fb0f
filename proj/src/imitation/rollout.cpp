#include "annealil/imitation/rollout.hpp"

#include <cmath>
#include <stdexcept>

namespace annealil::imitation {

void RolloutBuffer::push(Observation o, Action a, double log_prob, double value, double env_reward) {
  obs.push_back(std::move(o));
  actions.push_back(std::move(a));
  log_probs.push_back(log_prob);
  values.push_back(value);
  rewards.push_back(0.0);
  env_rewards.push_back(env_reward);
  terminal.push_back(0);
  segment_end.push_back(0);
  bootstrap.push_back(0.0);
}

void RolloutBuffer::close_segment(bool is_terminal, double bootstrap_value) {
  if (obs.empty()) throw std::logic_error("RolloutBuffer: no step to close");
  terminal.back() = is_terminal ? 1 : 0;
  segment_end.back() = 1;
  bootstrap.back() = is_terminal ? 0.0 : bootstrap_value;
}

void RolloutBuffer::validate() const {
  const std::size_t n = obs.size();
  if (actions.size() != n || log_probs.size() != n || values.size() != n || rewards.size() != n ||
      env_rewards.size() != n || terminal.size() != n || segment_end.size() != n || bootstrap.size() != n) {
    throw std::invalid_argument("RolloutBuffer: array lengths differ");
  }
  if (n == 0) throw std::invalid_argument("RolloutBuffer: empty");
  if (!segment_end.back()) throw std::invalid_argument("RolloutBuffer: final segment has no bootstrap value");
  for (std::size_t i = 0; i < n; ++i) {
    if (terminal[i] && bootstrap[i] != 0.0) throw std::invalid_argument("RolloutBuffer: terminal bootstrap must be 0");
    if (terminal[i] && !segment_end[i]) throw std::invalid_argument("RolloutBuffer: terminal step inside a segment");
  }
}

SampleBatch RolloutBuffer::samples() const {
  SampleBatch b;
  if (obs.empty()) return b;
  b.obs.resize(obs.front().size(), static_cast<Eigen::Index>(obs.size()));
  b.actions.resize(actions.front().size(), static_cast<Eigen::Index>(actions.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    b.obs.col(static_cast<Eigen::Index>(i)) = obs[i];
    b.actions.col(static_cast<Eigen::Index>(i)) = actions[i];
  }
  return b;
}

AdvantageEstimate compute_advantages(const RolloutBuffer& buffer, double gamma, double lambda) {
  buffer.validate();
  const auto n = static_cast<Eigen::Index>(buffer.size());
  AdvantageEstimate est;
  est.advantages.resize(n);
  est.value_targets.resize(n);
  double running = 0.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const bool end = buffer.segment_end[i] != 0;
    const double next_value = end ? buffer.bootstrap[i] : buffer.values[i + 1];
    const double delta = buffer.rewards[i] + gamma * next_value - buffer.values[i];
    running = delta + (end ? 0.0 : gamma * lambda * running);
    est.advantages[i] = running;
    est.value_targets[i] = running + buffer.values[i];
  }
  return est;
}

Eigen::VectorXd normalize_advantages(const Eigen::VectorXd& advantages) {
  if (advantages.size() == 0) return advantages;
  const double mean = advantages.mean();
  const Eigen::VectorXd centered = advantages.array() - mean;
  const double std = std::sqrt(centered.squaredNorm() / static_cast<double>(advantages.size()));
  return centered / (std + 1e-8);
}

}  // namespace annealil::imitation
