#include "annealil/imitation/losses.hpp"

#include "annealil/neural/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace annealil::imitation {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw std::domain_error(std::string(what) + ": non-finite loss");
}

MatrixXd gather_columns(const MatrixXd& m, const std::vector<Index>& columns) {
  MatrixXd out(m.rows(), static_cast<Index>(columns.size()));
  for (Index j = 0; j < out.cols(); ++j) out.col(j) = m.col(columns[j]);
  return out;
}

VectorXd gather_entries(const VectorXd& v, const std::vector<Index>& idx) {
  VectorXd out(static_cast<Index>(idx.size()));
  for (Index j = 0; j < out.size(); ++j) out[j] = v[idx[j]];
  return out;
}

// Derivatives of log pi(a_j|s_j) with respect to the head output of column j
// and to the (effective) log-std vector.
struct LogProbJacobian {
  VectorXd log_probs;
  MatrixXd d_head;
  MatrixXd d_log_std;  // gaussian only
};

LogProbJacobian log_prob_jacobian(const Net& net, const Net::Forward& fwd, const MatrixXd& actions) {
  const Index n = fwd.batch_size();
  if (actions.cols() != n) throw std::invalid_argument("log_prob: action batch size mismatch");
  LogProbJacobian j;
  j.log_probs.resize(n);
  j.d_head.resize(fwd.head.rows(), n);

  if (net.spec().head == neural::HeadKind::categorical) {
    if (actions.rows() != 1) throw std::invalid_argument("log_prob: discrete actions must be one row");
    for (Index c = 0; c < n; ++c) {
      const VectorXd logp = neural::log_softmax(fwd.head.col(c));
      const auto a = static_cast<Index>(std::lround(actions(0, c)));
      if (a < 0 || a >= logp.size()) throw std::invalid_argument("log_prob: action index out of range");
      j.log_probs[c] = logp[a];
      j.d_head.col(c) = -logp.array().exp().matrix();
      j.d_head(a, c) += 1.0;
    }
    return j;
  }
  if (net.spec().head != neural::HeadKind::gaussian) throw std::logic_error("log_prob: not a policy network");
  if (actions.rows() != fwd.head.rows()) throw std::invalid_argument("log_prob: action dimension mismatch");

  const VectorXd log_std = net.log_std();
  const VectorXd inv_var = (-2.0 * log_std).array().exp();
  const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi);
  const MatrixXd diff = actions - fwd.head;
  const MatrixXd z2 = diff.array().square().colwise() * inv_var.array();
  j.log_probs = (-0.5 * z2.colwise().sum().array() - log_std.sum() - log_norm * static_cast<double>(log_std.size()))
                    .matrix()
                    .transpose();
  j.d_head = diff.array().colwise() * inv_var.array();
  j.d_log_std = z2.array() - 1.0;
  return j;
}

// Scatters head/value/log-std derivatives into a flat gradient.
VectorXd assemble(const Net& net, const Net::Forward& fwd, const MatrixXd& d_head, const RowVectorXd& d_value,
                  const VectorXd& d_log_std) {
  VectorXd grad = net.backward(fwd, d_head, d_value);
  if (net.spec().has_log_std() && d_log_std.size() > 0) {
    grad.segment(net.log_std_offset(), d_log_std.size()) += d_log_std.cwiseProduct(net.log_std_mask());
  }
  return grad;
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// Accumulates the cloning term into (d_head, d_log_std) of the expert pass.
struct ExpertTerm {
  double loss = 0.0;
  MatrixXd d_head;
  VectorXd d_log_std;
};

ExpertTerm bc_term(const Net& policy, const Net::Forward& fwd, const MatrixXd& actions, double scale) {
  const LogProbJacobian j = log_prob_jacobian(policy, fwd, actions);
  const double n = static_cast<double>(fwd.batch_size());
  ExpertTerm t;
  t.loss = -j.log_probs.mean();
  t.d_head = (-scale / n) * j.d_head;
  if (j.d_log_std.size() > 0) t.d_log_std = (-scale / n) * j.d_log_std.rowwise().sum();
  return t;
}

// Per-sample dL/dlog pi for the policy-gradient term.
VectorXd pg_coefficients(const PolicyBatch& batch, const VectorXd& log_probs, double ppo_clip, double& loss) {
  const Index n = log_probs.size();
  VectorXd coef(n);
  loss = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double adv = batch.advantages[i];
    if (ppo_clip <= 0.0) {
      loss -= log_probs[i] * adv;
      coef[i] = -adv;
      continue;
    }
    const double ratio = std::exp(log_probs[i] - batch.old_log_probs[i]);
    const double clipped = std::clamp(ratio, 1.0 - ppo_clip, 1.0 + ppo_clip);
    const double unclipped_obj = ratio * adv;
    const double clipped_obj = clipped * adv;
    loss -= std::min(unclipped_obj, clipped_obj);
    coef[i] = unclipped_obj <= clipped_obj ? -adv * ratio : 0.0;
  }
  loss /= static_cast<double>(n);
  return coef / static_cast<double>(n);
}

// Per-sample entropies and dH/dhead (categorical) or dH/dlog-std summed (gaussian).
struct EntropyJacobian {
  VectorXd values;
  MatrixXd d_head;
  VectorXd d_log_std;
};

EntropyJacobian entropy_jacobian(const Net& net, const Net::Forward& fwd) {
  const Index n = fwd.batch_size();
  EntropyJacobian e;
  e.values.resize(n);
  if (net.spec().head == neural::HeadKind::categorical) {
    e.d_head.resize(fwd.head.rows(), n);
    for (Index c = 0; c < n; ++c) {
      const VectorXd logp = neural::log_softmax(fwd.head.col(c));
      const VectorXd p = logp.array().exp();
      const double h = -(p.array() * logp.array()).sum();
      e.values[c] = h;
      e.d_head.col(c) = -(p.array() * (logp.array() + h)).matrix();
    }
  } else {
    const VectorXd log_std = net.log_std();
    e.values.setConstant(neural::gaussian_entropy<double>(log_std));
    e.d_head = MatrixXd::Zero(fwd.head.rows(), n);
    e.d_log_std = VectorXd::Constant(log_std.size(), static_cast<double>(n));
  }
  return e;
}

}  // namespace

SampleBatch SampleBatch::gather(const std::vector<Index>& columns) const {
  return {gather_columns(obs, columns), gather_columns(actions, columns)};
}

PolicyBatch PolicyBatch::gather(const std::vector<Index>& columns) const {
  return {samples.gather(columns), gather_entries(old_log_probs, columns), gather_entries(advantages, columns),
          gather_entries(value_targets, columns)};
}

int disc_input_dim(int obs_dim, const ActionSpec& spec) { return obs_dim + spec.size; }

MatrixXd disc_input(const SampleBatch& batch, const ActionSpec& spec) {
  const Index n = batch.size();
  MatrixXd input = MatrixXd::Zero(batch.obs.rows() + spec.size, n);
  input.topRows(batch.obs.rows()) = batch.obs;
  if (spec.kind == ActionKind::discrete) {
    for (Index c = 0; c < n; ++c) {
      const auto a = static_cast<Index>(std::lround(batch.actions(0, c)));
      if (a < 0 || a >= spec.size) throw std::invalid_argument("disc_input: action index out of range");
      input(batch.obs.rows() + a, c) = 1.0;
    }
  } else {
    input.bottomRows(spec.size) = batch.actions.cwiseMax(-1.0).cwiseMin(1.0);
  }
  return input;
}

VectorXd batch_log_probs(const Net& policy, const Net::Forward& fwd, const MatrixXd& actions) {
  return log_prob_jacobian(policy, fwd, actions).log_probs;
}

LossGrad bc_loss(const Net& policy, const SampleBatch& expert) {
  if (expert.empty()) throw std::invalid_argument("bc_loss: empty expert batch");
  const auto fwd = policy.forward(expert.obs);
  const ExpertTerm t = bc_term(policy, fwd, expert.actions, 1.0);
  require_finite(t.loss, "bc_loss");
  return {t.loss, assemble(policy, fwd, t.d_head, RowVectorXd(), t.d_log_std)};
}

LossGrad disc_loss(const Net& disc, const SampleBatch& expert, const SampleBatch& policy, const DiscMode& mode,
                   const ActionSpec& spec) {
  if (expert.empty() || policy.empty()) throw std::invalid_argument("disc_loss: empty batch");
  const auto fe = disc.forward(disc_input(expert, spec));
  const auto fp = disc.forward(disc_input(policy, spec));
  const double ne = static_cast<double>(expert.size());
  const double np = static_cast<double>(policy.size());

  double loss = 0.0;
  MatrixXd de(1, expert.size());
  MatrixXd dp(1, policy.size());
  if (mode.variant == DiscVariant::gan) {
    // -log sigmoid(f) = softplus(-f); -log(1 - sigmoid(f)) = softplus(f).
    for (Index c = 0; c < expert.size(); ++c) {
      const double f = fe.head(0, c);
      loss += softplus(-f) / ne;
      de(0, c) = (sigmoid(f) - 1.0) / ne;
    }
    for (Index c = 0; c < policy.size(); ++c) {
      const double f = fp.head(0, c);
      loss += softplus(f) / np;
      dp(0, c) = sigmoid(f) / np;
    }
  } else {
    loss = fp.head.mean() - fe.head.mean();
    de.setConstant(-1.0 / ne);
    dp.setConstant(1.0 / np);
  }
  require_finite(loss, "disc_loss");
  VectorXd grad = disc.backward(fe, de, RowVectorXd());
  grad += disc.backward(fp, dp, RowVectorXd());
  return {loss, std::move(grad)};
}

void clip_weights(Net& disc, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("clip_weights: bound must be positive");
  disc.params() = disc.params().cwiseMax(-c).cwiseMin(c);
}

double surrogate_from_logit(double logit, const DiscMode& mode) {
  if (mode.variant == DiscVariant::wgan) return logit;
  return std::min(softplus(logit), kMaxGanReward);
}

VectorXd surrogate_rewards(const Net& disc, const SampleBatch& batch, const DiscMode& mode, const ActionSpec& spec) {
  const auto fwd = disc.forward(disc_input(batch, spec));
  VectorXd out(batch.size());
  for (Index c = 0; c < out.size(); ++c) out[c] = surrogate_from_logit(fwd.head(0, c), mode);
  return out;
}

LossGrad pg_loss(const Net& policy, const PolicyBatch& batch, double ppo_clip) {
  const auto fwd = policy.forward(batch.samples.obs);
  const LogProbJacobian j = log_prob_jacobian(policy, fwd, batch.samples.actions);
  double loss = 0.0;
  const VectorXd coef = pg_coefficients(batch, j.log_probs, ppo_clip, loss);
  require_finite(loss, "pg_loss");
  const MatrixXd d_head = j.d_head * coef.asDiagonal();
  VectorXd d_log_std;
  if (j.d_log_std.size() > 0) d_log_std = j.d_log_std * coef;
  return {loss, assemble(policy, fwd, d_head, RowVectorXd(), d_log_std)};
}

LossGrad value_loss(const Net& policy, const PolicyBatch& batch) {
  const auto fwd = policy.forward(batch.samples.obs);
  const RowVectorXd err = fwd.value - batch.value_targets.transpose();
  const double n = static_cast<double>(err.size());
  const double loss = 0.5 * err.squaredNorm() / n;
  require_finite(loss, "value_loss");
  return {loss, assemble(policy, fwd, MatrixXd::Zero(fwd.head.rows(), fwd.head.cols()), err / n, VectorXd())};
}

LossGrad mean_entropy(const Net& policy, const MatrixXd& obs) {
  const auto fwd = policy.forward(obs);
  const EntropyJacobian e = entropy_jacobian(policy, fwd);
  const double n = static_cast<double>(fwd.batch_size());
  VectorXd d_log_std;
  if (e.d_log_std.size() > 0) d_log_std = e.d_log_std / n;
  return {e.values.mean(), assemble(policy, fwd, e.d_head / n, RowVectorXd(), d_log_std)};
}

PolicyLossTerms policy_loss(const Net& policy, const PolicyBatch& batch, const SampleBatch& expert,
                            const PolicyLossConfig& config) {
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) throw std::invalid_argument("policy_loss: alpha outside [0, 1]");
  if (batch.samples.empty()) throw std::invalid_argument("policy_loss: empty policy batch");

  PolicyLossTerms terms;
  const auto fwd = policy.forward(batch.samples.obs);
  const double n = static_cast<double>(fwd.batch_size());

  const LogProbJacobian lp = log_prob_jacobian(policy, fwd, batch.samples.actions);
  const VectorXd coef = (1.0 - config.alpha) * pg_coefficients(batch, lp.log_probs, config.ppo_clip, terms.pg);
  MatrixXd d_head = lp.d_head * coef.asDiagonal();
  VectorXd d_log_std;
  if (lp.d_log_std.size() > 0) d_log_std = lp.d_log_std * coef;

  const EntropyJacobian ent = entropy_jacobian(policy, fwd);
  terms.entropy = ent.values.mean();
  d_head -= (config.entropy_coef / n) * ent.d_head;
  if (ent.d_log_std.size() > 0) d_log_std -= (config.entropy_coef / n) * ent.d_log_std;

  const RowVectorXd err = fwd.value - batch.value_targets.transpose();
  terms.value = 0.5 * err.squaredNorm() / n;
  const RowVectorXd d_value = (config.value_coef / n) * err;

  terms.grad = assemble(policy, fwd, d_head, d_value, d_log_std);

  if (!expert.empty()) {
    const auto efwd = policy.forward(expert.obs);
    const ExpertTerm bc = bc_term(policy, efwd, expert.actions, config.alpha);
    terms.bc = bc.loss;
    terms.grad += assemble(policy, efwd, bc.d_head, RowVectorXd(), bc.d_log_std);
  }

  terms.total = config.alpha * terms.bc + (1.0 - config.alpha) * terms.pg + config.value_coef * terms.value -
                config.entropy_coef * terms.entropy;
  require_finite(terms.total, "policy_loss");
  return terms;
}

}  // namespace annealil::imitation
