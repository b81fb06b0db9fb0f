#pragma once

#include "annealil/neural/network.hpp"
#include "annealil/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace annealil::neural {

/// Action distribution for one state: categorical logits, or a diagonal
/// Gaussian with mean `params` and log-std `log_std`.
template <typename Scalar>
struct PolicyOutput {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  HeadKind kind = HeadKind::categorical;
  Vector params;
  Vector log_std;

  static PolicyOutput categorical(Vector logits) { return {HeadKind::categorical, std::move(logits), {}}; }
  static PolicyOutput gaussian(Vector mean, Vector log_std) {
    return {HeadKind::gaussian, std::move(mean), std::move(log_std)};
  }
};

template <typename Derived>
auto log_softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Scalar max = logits.maxCoeff();
  const Scalar lse = max + std::log((logits.array() - max).exp().sum());
  return (logits.array() - lse).matrix().eval();
}

template <typename Derived>
auto softmax(const Eigen::MatrixBase<Derived>& logits) {
  return log_softmax(logits).array().exp().matrix().eval();
}

template <typename Derived>
typename Derived::Scalar categorical_entropy(const Eigen::MatrixBase<Derived>& logits) {
  const auto logp = log_softmax(logits);
  return -(logp.array().exp() * logp.array()).sum();
}

template <typename Scalar>
Scalar gaussian_log_prob(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& mean,
                         const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& log_std,
                         const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& action) {
  const auto z = ((action - mean).array() / log_std.array().exp());
  return (-Scalar(0.5) * z.square() - log_std.array() - Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>))
      .sum();
}

template <typename Scalar>
Scalar gaussian_entropy(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& log_std) {
  const Scalar per_dim = Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar> * std::numbers::e_v<Scalar>);
  return (log_std.array() + per_dim).sum();
}

template <typename Scalar>
Scalar log_prob(const PolicyOutput<Scalar>& out, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& action) {
  if (out.kind == HeadKind::categorical) {
    const auto a = static_cast<Eigen::Index>(std::lround(static_cast<double>(action[0])));
    if (action.size() != 1 || a < 0 || a >= out.params.size()) {
      throw std::invalid_argument("log_prob: action index out of range");
    }
    return log_softmax(out.params)[a];
  }
  if (action.size() != out.params.size()) throw std::invalid_argument("log_prob: action dimension mismatch");
  return gaussian_log_prob<Scalar>(out.params, out.log_std, action);
}

template <typename Scalar>
Scalar entropy(const PolicyOutput<Scalar>& out) {
  return out.kind == HeadKind::categorical ? categorical_entropy(out.params) : gaussian_entropy<Scalar>(out.log_std);
}

/// Unclamped draw; categorical actions come back as a length-1 index vector.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sample_raw(const PolicyOutput<Scalar>& out, Rng& rng) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (out.kind == HeadKind::categorical) {
    const Vector p = softmax(out.params);
    const double u = uniform01(rng);
    double cdf = 0.0;
    Eigen::Index choice = p.size() - 1;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      cdf += static_cast<double>(p[i]);
      if (u < cdf) {
        choice = i;
        break;
      }
    }
    return Vector::Constant(1, static_cast<Scalar>(choice));
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector a(out.params.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a[i] = out.params[i] + std::exp(out.log_std[i]) * static_cast<Scalar>(normal(rng));
  }
  return a;
}

/// Seeded draw; Gaussian samples are clamped to the [-1, 1] action box.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sample_action(const PolicyOutput<Scalar>& out, Rng& rng) {
  auto a = sample_raw(out, rng);
  if (out.kind == HeadKind::gaussian) a = a.cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
  return a;
}

/// Argmax action (categorical) or the clamped mean (Gaussian).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> greedy_action(const PolicyOutput<Scalar>& out) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (out.kind == HeadKind::categorical) {
    Eigen::Index best = 0;
    out.params.maxCoeff(&best);
    return Vector::Constant(1, static_cast<Scalar>(best));
  }
  return out.params.cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
}

}  // namespace annealil::neural
