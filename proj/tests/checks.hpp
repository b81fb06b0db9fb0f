#pragma once

// Randomized property checks shared by the unit tests and the acceptance run.

#include "annealil/imitation/losses.hpp"
#include "annealil/neural/distributions.hpp"
#include "annealil/random.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace checks {

using annealil::ActionKind;
using annealil::ActionSpec;
using annealil::Rng;
using annealil::imitation::Net;
using annealil::imitation::PolicyBatch;
using annealil::imitation::SampleBatch;
using annealil::neural::HeadKind;

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

// Small random network with every parameter block nonzero.
inline Net random_net(int input_dim, HeadKind head, int head_size, Rng& rng) {
  Net net({input_dim, {6, 5}, head, head_size});
  net.initialize(rng, 1.0);
  std::normal_distribution<double> normal(0.0, 0.3);
  for (const auto& l : net.layers()) {
    auto b = net.bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = normal(rng);
  }
  if (net.spec().has_log_std()) {
    auto ls = net.log_std_param();
    for (Eigen::Index i = 0; i < ls.size(); ++i) ls[i] = normal(rng);
  }
  return net;
}

inline SampleBatch random_samples(int obs_dim, const ActionSpec& spec, int n, Rng& rng) {
  SampleBatch b;
  b.obs = gaussian_matrix(obs_dim, n, rng);
  if (spec.kind == ActionKind::discrete) {
    b.actions.resize(1, n);
    for (int j = 0; j < n; ++j) b.actions(0, j) = static_cast<double>(rng() % static_cast<unsigned>(spec.size));
  } else {
    b.actions = gaussian_matrix(spec.size, n, rng, 0.5);
  }
  return b;
}

inline PolicyBatch random_policy_batch(int obs_dim, const ActionSpec& spec, int n, Rng& rng) {
  PolicyBatch p;
  p.samples = random_samples(obs_dim, spec, n, rng);
  p.old_log_probs = gaussian_matrix(n, 1, rng).col(0);
  p.advantages = gaussian_matrix(n, 1, rng).col(0);
  p.value_targets = gaussian_matrix(n, 1, rng).col(0);
  return p;
}

struct GradCheck {
  std::string name;
  int instances = 0;
  double max_rel_error = 0.0;
};

// Central differences (h = 1e-5) against the analytic gradient of every loss,
// on `instances` random small nets/batches per loss (obs_dim <= 10, batch <= 8).
inline std::vector<GradCheck> gradient_checks(int instances, std::uint64_t seed) {
  namespace im = annealil::imitation;
  std::vector<GradCheck> out;
  auto record = [&](const std::string& name, double err) {
    auto it = std::find_if(out.begin(), out.end(), [&](const GradCheck& g) { return g.name == name; });
    if (it == out.end()) {
      out.push_back({name, 0, 0.0});
      it = out.end() - 1;
    }
    ++it->instances;
    it->max_rel_error = std::max(it->max_rel_error, err);
  };
  auto check = [&](const std::string& name, Net net, const std::function<im::LossGrad(const Net&)>& fn) {
    const Eigen::VectorXd analytic = fn(net).grad;
    const Eigen::VectorXd numeric = oracle::finite_difference(
        [&](const Eigen::VectorXd& p) {
          Net copy = net;
          copy.params() = p;
          return fn(copy).loss;
        },
        net.params());
    record(name, oracle::relative_error(analytic, numeric));
  };

  Rng rng(seed);
  for (int i = 0; i < instances; ++i) {
    const int obs_dim = 2 + static_cast<int>(rng() % 9);
    const int n = 1 + static_cast<int>(rng() % 8);
    for (const ActionSpec spec : {ActionSpec{ActionKind::discrete, 4}, ActionSpec{ActionKind::continuous, 2}}) {
      const std::string tag = spec.kind == ActionKind::discrete ? "discrete" : "continuous";
      const HeadKind head = spec.kind == ActionKind::discrete ? HeadKind::categorical : HeadKind::gaussian;
      const Net policy = random_net(obs_dim, head, spec.size, rng);
      const SampleBatch expert = random_samples(obs_dim, spec, n, rng);
      const PolicyBatch batch = random_policy_batch(obs_dim, spec, n, rng);

      check("bc_loss/" + tag, policy, [&](const Net& p) { return im::bc_loss(p, expert); });
      check("value_loss/" + tag, policy, [&](const Net& p) { return im::value_loss(p, batch); });
      for (double alpha : {0.0, 0.5, 1.0}) {
        char name[64];
        std::snprintf(name, sizeof name, "policy_loss(alpha=%g)/%s", alpha, tag.c_str());
        check(name, policy, [&](const Net& p) {
          const auto t = im::policy_loss(p, batch, expert, {alpha, 0.01, 0.5, 0.0});
          return im::LossGrad{t.total, t.grad};
        });
      }

      const Net disc = random_net(im::disc_input_dim(obs_dim, spec), HeadKind::scalar, 1, rng);
      const SampleBatch fake = random_samples(obs_dim, spec, 1 + static_cast<int>(rng() % 8), rng);
      for (auto variant : {im::DiscVariant::gan, im::DiscVariant::wgan}) {
        const im::DiscMode mode{variant, 0.01};
        check(std::string("disc_loss/") + (variant == im::DiscVariant::gan ? "gan/" : "wgan/") + tag, disc,
              [&](const Net& d) { return im::disc_loss(d, expert, fake, mode, spec); });
      }
    }
  }
  return out;
}

// Gradient of the cloning loss vs the delta-weighted policy-gradient form on a
// one-state K-armed bandit with a tabular softmax policy. Returns the largest
// elementwise difference over `instances` random logit vectors.
inline double importance_sampling_rewrite_error(int instances, std::uint64_t seed) {
  namespace im = annealil::imitation;
  constexpr int K = 4;
  const std::vector<int> expert_actions = {2, 2, 0, 3, 2};
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(K);  // empirical expert frequency
  for (int a : expert_actions) delta[a] += 1.0 / static_cast<double>(expert_actions.size());

  SampleBatch expert;
  expert.obs = Eigen::MatrixXd::Ones(1, static_cast<Eigen::Index>(expert_actions.size()));
  expert.actions.resize(1, expert.obs.cols());
  for (std::size_t i = 0; i < expert_actions.size(); ++i) expert.actions(0, static_cast<Eigen::Index>(i)) = expert_actions[i];

  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < instances; ++trial) {
    Net tabular({1, {}, HeadKind::categorical, K});  // logits = w + b for the single state
    tabular.params() = gaussian_matrix(tabular.num_params(), 1, rng).col(0);
    const Eigen::VectorXd logits =
        tabular.weight(tabular.head_layer()).col(0) + Eigen::VectorXd(tabular.bias(tabular.head_layer()));
    const Eigen::VectorXd pi = annealil::neural::softmax(logits);

    // E_{a~pi}[w(a) log pi(a)] with w = delta/pi, enumerated exactly over the
    // K actions: the batch holds each action once with weight K pi(a) w(a).
    PolicyBatch batch;
    batch.samples.obs = Eigen::MatrixXd::Ones(1, K);
    batch.samples.actions.resize(1, K);
    batch.advantages.resize(K);
    for (int a = 0; a < K; ++a) {
      batch.samples.actions(0, a) = a;
      batch.advantages[a] = K * pi[a] * (delta[a] / pi[a]);
    }
    batch.old_log_probs = Eigen::VectorXd::Zero(K);
    batch.value_targets = Eigen::VectorXd::Zero(K);

    const Eigen::VectorXd g_bc = im::bc_loss(tabular, expert).grad;
    const Eigen::VectorXd g_pg = im::pg_loss(tabular, batch).grad;
    worst = std::max(worst, (g_bc - g_pg).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace checks
