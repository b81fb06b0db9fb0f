#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace annealil::neural {

template <typename Scalar>
struct AdamState {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector m;
  Vector v;
  long step = 0;
  Scalar lr = Scalar(3e-4);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);

  AdamState() = default;
  AdamState(Eigen::Index n, Scalar learning_rate) : m(Vector::Zero(n)), v(Vector::Zero(n)), lr(learning_rate) {}
};

/// Bias-corrected Adam update of `params` in place.
template <typename Scalar>
void adam_step(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& params, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& grad,
               AdamState<Scalar>& state) {
  if (params.size() != grad.size() || state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  if (!grad.allFinite()) throw std::invalid_argument("adam_step: non-finite gradient");

  ++state.step;
  state.m = state.beta1 * state.m + (Scalar(1) - state.beta1) * grad;
  state.v = state.beta2 * state.v + (Scalar(1) - state.beta2) * grad.cwiseAbs2();
  const Scalar m_corr = Scalar(1) - std::pow(state.beta1, static_cast<Scalar>(state.step));
  const Scalar v_corr = Scalar(1) - std::pow(state.beta2, static_cast<Scalar>(state.step));
  params.array() -= state.lr * (state.m.array() / m_corr) / ((state.v.array() / v_corr).sqrt() + state.eps);
}

/// Rescales `grad` so its L2 norm is at most `max_norm`; returns the original norm.
template <typename Scalar>
Scalar clip_grad_norm(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& grad, Scalar max_norm) {
  const Scalar norm = grad.norm();
  if (max_norm > Scalar(0) && norm > max_norm) grad *= max_norm / norm;
  return norm;
}

}  // namespace annealil::neural
