#include "annealil/imitation/trainer.hpp"

#include "annealil/neural/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace annealil::imitation {

namespace {

using Eigen::Index;

// Stream identifiers for derive_seed; each consumer gets its own generator
// so that, e.g., freezing the discriminator leaves rollout sampling intact.
enum Stream : std::uint64_t { kPolicyInit = 1, kDiscInit, kRollout, kDisc, kUpdate, kEpisodes };

std::vector<Index> iota_indices(Index n) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  return idx;
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

SampleBatch to_batch(const Dataset& dataset) {
  const auto n = static_cast<Index>(dataset.num_transitions());
  const Index action_rows = dataset.action_spec.kind == ActionKind::discrete ? 1 : dataset.action_spec.size;
  SampleBatch b{Eigen::MatrixXd(dataset.obs_dim, n), Eigen::MatrixXd(action_rows, n)};
  Index c = 0;
  for (const auto& traj : dataset.trajectories) {
    for (const auto& t : traj) {
      b.obs.col(c) = t.obs;
      b.actions.col(c) = t.action;
      ++c;
    }
  }
  return b;
}

Net make_policy_net(int obs_dim, const ActionSpec& spec, const std::vector<int>& hidden, std::uint64_t seed) {
  const auto head = spec.kind == ActionKind::discrete ? neural::HeadKind::categorical : neural::HeadKind::gaussian;
  Net net(neural::NetSpec{obs_dim, hidden, head, spec.size});
  Rng rng(seed);
  net.initialize(rng, 0.01);
  return net;
}

Trainer::Trainer(TrainerConfig config, const Dataset* expert)
    : config_(std::move(config)),
      action_spec_(make_env(config_.env)->action_spec()),
      policy_(neural::NetSpec{1, {1}, neural::HeadKind::scalar, 1}),
      disc_(neural::NetSpec{1, {1}, neural::HeadKind::scalar, 1}),
      rollout_rng_(derive_seed(config_.seed, kRollout)),
      disc_rng_(derive_seed(config_.seed, kDisc)),
      update_rng_(derive_seed(config_.seed, kUpdate)) {
  if (config_.num_envs < 1 || config_.steps_per_env < 1) throw std::invalid_argument("Trainer: empty rollout");
  if (config_.epochs < 1 || config_.minibatches < 1 || config_.minibatches > config_.rollout_size()) {
    throw std::invalid_argument("Trainer: bad epoch/minibatch configuration");
  }
  if (config_.disc_mode.variant == DiscVariant::wgan && !(config_.disc_mode.clip > 0.0)) {
    throw std::invalid_argument("Trainer: wgan clip bound must be positive");
  }

  for (int e = 0; e < config_.num_envs; ++e) envs_.push_back(make_env(config_.env));
  const int obs_dim = envs_.front()->obs_dim();

  if (expert != nullptr) {
    if (expert->trajectories.empty() || expert->num_transitions() == 0) {
      throw std::invalid_argument("Trainer: expert dataset has no transitions");
    }
    if (expert->env_id != envs_.front()->id() || expert->obs_dim != obs_dim || !(expert->action_spec == action_spec_)) {
      throw std::invalid_argument("Trainer: expert dataset does not match environment " + envs_.front()->id());
    }
    expert_pool_ = to_batch(*expert);
  } else if (config_.reward_source == RewardSource::discriminator) {
    throw std::invalid_argument("Trainer: discriminator rewards need an expert dataset");
  }

  policy_ = make_policy_net(obs_dim, action_spec_, config_.hidden, derive_seed(config_.seed, kPolicyInit));
  disc_ = Net(neural::NetSpec{disc_input_dim(obs_dim, action_spec_), config_.hidden, neural::HeadKind::scalar, 1});
  Rng disc_init(derive_seed(config_.seed, kDiscInit));
  disc_.initialize(disc_init, 1.0);
  if (config_.disc_mode.variant == DiscVariant::wgan) clip_weights(disc_, config_.disc_mode.clip);

  policy_opt_ = neural::AdamState<double>(policy_.num_params(), config_.lr);
  disc_opt_ = neural::AdamState<double>(disc_.num_params(), config_.disc_lr);

  for (auto& env : envs_) {
    env_obs_.push_back(env->reset(derive_seed(derive_seed(config_.seed, kEpisodes), episodes_started_++)));
    env_returns_.push_back(0.0);
  }
}

RolloutBuffer Trainer::collect_rollout(IterationMetrics& metrics) {
  const int n_envs = config_.num_envs;
  const int obs_dim = envs_.front()->obs_dim();
  const std::uint64_t episode_base = derive_seed(config_.seed, kEpisodes);
  std::vector<RolloutBuffer> streams(static_cast<std::size_t>(n_envs));
  std::vector<double> finished;

  Eigen::VectorXd log_std;
  if (policy_.spec().has_log_std()) log_std = policy_.log_std();

  Eigen::MatrixXd obs(obs_dim, n_envs);
  for (int step = 0; step < config_.steps_per_env; ++step) {
    for (int e = 0; e < n_envs; ++e) obs.col(e) = env_obs_[e];
    const auto fwd = policy_.forward(obs);
    for (int e = 0; e < n_envs; ++e) {
      neural::PolicyOutput<double> out{policy_.spec().head, fwd.head.col(e), log_std};
      Action action = neural::sample_raw(out, rollout_rng_);
      const double lp = neural::log_prob(out, action);
      StepResult r = envs_[e]->step(action);
      auto& stream = streams[e];
      stream.push(env_obs_[e], action, lp, fwd.value(e), r.reward);
      env_returns_[e] += r.reward;
      if (r.done || r.truncated) {
        double bootstrap = 0.0;
        if (!r.done) bootstrap = policy_.forward(r.obs).value(0);
        stream.close_segment(r.done, bootstrap);
        finished.push_back(env_returns_[e]);
        env_returns_[e] = 0.0;
        env_obs_[e] = envs_[e]->reset(derive_seed(episode_base, episodes_started_++));
      } else {
        env_obs_[e] = std::move(r.obs);
      }
    }
  }

  // Bootstrap every stream cut off mid-episode.
  for (int e = 0; e < n_envs; ++e) obs.col(e) = env_obs_[e];
  const auto tail = policy_.forward(obs);
  RolloutBuffer buffer;
  for (int e = 0; e < n_envs; ++e) {
    auto& s = streams[e];
    if (!s.segment_end.back()) s.close_segment(false, tail.value(e));
    for (std::size_t i = 0; i < s.size(); ++i) {
      buffer.push(std::move(s.obs[i]), std::move(s.actions[i]), s.log_probs[i], s.values[i], s.env_rewards[i]);
      if (s.segment_end[i]) buffer.close_segment(s.terminal[i] != 0, s.bootstrap[i]);
    }
  }

  env_steps_ += config_.rollout_size();
  metrics.env_steps = env_steps_;
  metrics.episodes_completed = static_cast<int>(finished.size());
  metrics.mean_episode_return =
      finished.empty() ? nan() : std::accumulate(finished.begin(), finished.end(), 0.0) / static_cast<double>(finished.size());
  return buffer;
}

SampleBatch Trainer::sample_expert(Index n, Rng& rng) const {
  std::uniform_int_distribution<Index> pick(0, expert_pool_.size() - 1);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (auto& i : idx) i = pick(rng);
  return expert_pool_.gather(idx);
}

double Trainer::update_discriminator(const RolloutBuffer& buffer) {
  const SampleBatch policy_samples = buffer.samples();
  const Index n = policy_samples.size();
  const Index batch = config_.disc_batch > 0 ? std::min<Index>(config_.disc_batch, n) : n;

  auto policy_minibatch = [&]() {
    if (batch == n) return policy_samples;
    std::vector<Index> idx = iota_indices(n);
    std::shuffle(idx.begin(), idx.end(), disc_rng_);
    idx.resize(static_cast<std::size_t>(batch));
    return policy_samples.gather(idx);
  };

  if (config_.disc_frozen) {
    const SampleBatch p = policy_minibatch();
    return disc_loss(disc_, sample_expert(batch, disc_rng_), p, config_.disc_mode, action_spec_).loss;
  }

  double total = 0.0;
  for (int k = 0; k < config_.disc_steps; ++k) {
    const SampleBatch p = policy_minibatch();
    const SampleBatch e = sample_expert(batch, disc_rng_);
    LossGrad lg = disc_loss(disc_, e, p, config_.disc_mode, action_spec_);
    neural::adam_step(disc_.params(), lg.grad, disc_opt_);
    if (config_.disc_mode.variant == DiscVariant::wgan) clip_weights(disc_, config_.disc_mode.clip);
    total += lg.loss;
  }
  return total / std::max(1, config_.disc_steps);
}

void Trainer::fill_rewards(RolloutBuffer& buffer) {
  if (config_.reward_source == RewardSource::environment) {
    buffer.rewards = buffer.env_rewards;
    return;
  }
  const Eigen::VectorXd r = surrogate_rewards(disc_, buffer.samples(), config_.disc_mode, action_spec_);
  buffer.rewards.assign(r.data(), r.data() + r.size());
}

void Trainer::update_policy(const RolloutBuffer& buffer, double alpha, IterationMetrics& metrics) {
  const AdvantageEstimate est = compute_advantages(buffer, config_.gamma, config_.gae_lambda);
  PolicyBatch full;
  full.samples = buffer.samples();
  full.old_log_probs = Eigen::Map<const Eigen::VectorXd>(buffer.log_probs.data(), static_cast<Index>(buffer.size()));
  full.advantages = normalize_advantages(est.advantages);
  full.value_targets = est.value_targets;

  const PolicyLossConfig loss_config{alpha, config_.entropy_coef, config_.value_coef, config_.ppo_clip};
  const Index n = full.samples.size();
  const Index per_batch = n / config_.minibatches;
  const bool single = config_.epochs == 1 && config_.minibatches == 1;

  double bc = 0.0, pg = 0.0, value = 0.0, ent = 0.0;
  int updates = 0;
  std::vector<Index> order = iota_indices(n);
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    if (!single) std::shuffle(order.begin(), order.end(), update_rng_);
    for (int mb = 0; mb < config_.minibatches; ++mb) {
      PolicyBatch batch;
      if (single) {
        batch = full;
      } else {
        std::vector<Index> idx(order.begin() + mb * per_batch, order.begin() + (mb + 1) * per_batch);
        batch = full.gather(idx);
      }
      SampleBatch expert;
      if (!expert_pool_.empty()) expert = sample_expert(batch.samples.size(), update_rng_);

      PolicyLossTerms terms = policy_loss(policy_, batch, expert, loss_config);
      neural::clip_grad_norm(terms.grad, config_.max_grad_norm);
      neural::adam_step(policy_.params(), terms.grad, policy_opt_);

      bc += terms.bc;
      pg += terms.pg;
      value += terms.value;
      ent += terms.entropy;
      ++updates;
      last_policy_batch_ = std::move(batch);
      last_expert_batch_ = std::move(expert);
    }
  }
  metrics.bc_loss = expert_pool_.empty() ? nan() : bc / updates;
  metrics.pg_loss = pg / updates;
  metrics.value_loss = value / updates;
  metrics.entropy = ent / updates;
}

IterationMetrics Trainer::train_iteration(long t) {
  IterationMetrics m;
  m.iteration = t;
  m.alpha = alpha_at(config_.schedule, t);

  RolloutBuffer buffer = collect_rollout(m);
  m.disc_loss = config_.reward_source == RewardSource::discriminator ? update_discriminator(buffer) : nan();
  fill_rewards(buffer);
  m.mean_surrogate_reward =
      std::accumulate(buffer.rewards.begin(), buffer.rewards.end(), 0.0) / static_cast<double>(buffer.size());
  update_policy(buffer, m.alpha, m);

  for (double v : {m.pg_loss, m.value_loss, m.entropy}) {
    if (!std::isfinite(v)) throw std::domain_error("train_iteration: non-finite loss");
  }
  last_rollout_ = std::move(buffer);
  return m;
}

IterationMetrics Trainer::discriminator_iteration(long t) {
  if (config_.reward_source != RewardSource::discriminator) {
    throw std::logic_error("discriminator_iteration: trainer has no discriminator reward");
  }
  IterationMetrics m;
  m.iteration = t;
  m.alpha = nan();
  RolloutBuffer buffer = collect_rollout(m);
  m.disc_loss = update_discriminator(buffer);
  fill_rewards(buffer);
  m.mean_surrogate_reward =
      std::accumulate(buffer.rewards.begin(), buffer.rewards.end(), 0.0) / static_cast<double>(buffer.size());
  m.bc_loss = m.pg_loss = m.value_loss = m.entropy = nan();
  last_rollout_ = std::move(buffer);
  return m;
}

// ---------------------------------------------------------------------------

namespace {

double mean_nll(const Net& policy, const SampleBatch& batch) {
  const auto fwd = policy.forward(batch.obs);
  return -batch_log_probs(policy, fwd, batch.actions).mean();
}

}  // namespace

BcResult train_bc(Net& policy, const Dataset& train, const Dataset& val, const BcConfig& config,
                  const std::function<void(const BcEpoch&, const Net&)>& on_epoch) {
  const SampleBatch train_batch = to_batch(train);
  const SampleBatch val_batch = to_batch(val);
  if (train_batch.empty() || val_batch.empty()) throw std::invalid_argument("train_bc: empty split");
  if (config.batch_size < 1 || config.max_epochs < 1) throw std::invalid_argument("train_bc: bad configuration");

  neural::AdamState<double> opt(policy.num_params(), config.lr);
  Rng rng(config.seed);
  std::vector<Index> order = iota_indices(train_batch.size());

  BcResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_params = policy.params();
  int since_best = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const SampleBatch mb = train_batch.gather({order.begin() + static_cast<std::ptrdiff_t>(start),
                                                 order.begin() + static_cast<std::ptrdiff_t>(stop)});
      LossGrad lg = bc_loss(policy, mb);
      neural::adam_step(policy.params(), lg.grad, opt);
      loss_sum += lg.loss;
      ++batches;
    }
    const BcEpoch record{epoch, loss_sum / batches, mean_nll(policy, val_batch)};
    if (!std::isfinite(record.val_loss)) throw std::domain_error("train_bc: non-finite validation loss");
    result.history.push_back(record);
    if (on_epoch) on_epoch(record, policy);

    if (record.val_loss < result.best_val_loss) {
      result.best_val_loss = record.val_loss;
      result.best_epoch = epoch;
      best_params = policy.params();
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  policy.params() = best_params;
  return result;
}

}  // namespace annealil::imitation
