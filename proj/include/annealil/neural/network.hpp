#pragma once

#include "annealil/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace annealil::neural {

enum class HeadKind { categorical, gaussian, scalar };

/// Architecture of a tanh MLP with task heads. Categorical and Gaussian
/// networks carry a policy head plus a value head on the shared trunk;
/// Gaussian networks also own a state-independent log-std block. Scalar
/// networks (discriminators) have a single linear output.
struct NetSpec {
  int input_dim = 0;
  std::vector<int> hidden = {64, 64};
  HeadKind head = HeadKind::categorical;
  int head_size = 1;

  bool has_value_head() const { return head != HeadKind::scalar; }
  bool has_log_std() const { return head == HeadKind::gaussian; }
  bool operator==(const NetSpec&) const = default;
};

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

template <typename Scalar>
class Network {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
  using Index = Eigen::Index;

  struct Layer {
    Index weight_offset = 0;
    Index bias_offset = 0;
    Index rows = 0;  // fan-out
    Index cols = 0;  // fan-in
  };

  /// Cached intermediate values of one batched forward pass. Samples are
  /// columns; `activations[0]` is the input and `activations[k]` the k-th
  /// hidden layer output.
  struct Forward {
    std::vector<Matrix> activations;
    Matrix head;
    RowVector value;

    Index batch_size() const { return activations.front().cols(); }
  };

  explicit Network(NetSpec spec) : spec_(std::move(spec)) {
    if (spec_.input_dim <= 0 || spec_.head_size <= 0) throw std::invalid_argument("Network: empty layer");
    Index offset = 0;
    Index fan_in = spec_.input_dim;
    auto add_layer = [&](Index fan_out) {
      Layer l{offset, offset + fan_out * fan_in, fan_out, fan_in};
      offset += fan_out * fan_in + fan_out;
      layers_.push_back(l);
    };
    for (int h : spec_.hidden) {
      if (h <= 0) throw std::invalid_argument("Network: empty hidden layer");
      add_layer(h);
      fan_in = h;
    }
    add_layer(spec_.head_size);
    if (spec_.has_value_head()) add_layer(1);
    log_std_offset_ = offset;
    if (spec_.has_log_std()) offset += spec_.head_size;
    params_ = Vector::Zero(offset);
  }

  const NetSpec& spec() const { return spec_; }
  Index num_params() const { return params_.size(); }
  Vector& params() { return params_; }
  const Vector& params() const { return params_; }
  const std::vector<Layer>& layers() const { return layers_; }

  Index num_hidden() const { return static_cast<Index>(spec_.hidden.size()); }
  const Layer& head_layer() const { return layers_[num_hidden()]; }
  const Layer& value_layer() const { return layers_.at(num_hidden() + 1); }
  Index log_std_offset() const { return log_std_offset_; }

  Eigen::Map<const Matrix> weight(const Layer& l) const {
    return {params_.data() + l.weight_offset, l.rows, l.cols};
  }
  Eigen::Map<Matrix> weight(const Layer& l) { return {params_.data() + l.weight_offset, l.rows, l.cols}; }
  Eigen::Map<const Vector> bias(const Layer& l) const { return {params_.data() + l.bias_offset, l.rows}; }
  Eigen::Map<Vector> bias(const Layer& l) { return {params_.data() + l.bias_offset, l.rows}; }

  /// Raw (unclamped) log-std parameters.
  Eigen::Map<Vector> log_std_param() {
    if (!spec_.has_log_std()) throw std::logic_error("Network: no log-std block");
    return {params_.data() + log_std_offset_, spec_.head_size};
  }

  /// Effective log-std, clamped to [kLogStdMin, kLogStdMax].
  Vector log_std() const {
    if (!spec_.has_log_std()) throw std::logic_error("Network: no log-std block");
    return Eigen::Map<const Vector>(params_.data() + log_std_offset_, spec_.head_size)
        .cwiseMax(Scalar(kLogStdMin))
        .cwiseMin(Scalar(kLogStdMax));
  }

  /// d(effective log-std)/d(raw): 1 inside the clamp range, 0 outside.
  Vector log_std_mask() const {
    Vector mask(spec_.head_size);
    for (Index i = 0; i < mask.size(); ++i) {
      const Scalar raw = params_[log_std_offset_ + i];
      mask[i] = (raw >= Scalar(kLogStdMin) && raw <= Scalar(kLogStdMax)) ? Scalar(1) : Scalar(0);
    }
    return mask;
  }

  Forward forward(const Matrix& input) const {
    if (input.rows() != spec_.input_dim) {
      throw std::invalid_argument("Network: expected input dimension " + std::to_string(spec_.input_dim) +
                                  ", got " + std::to_string(input.rows()));
    }
    Forward f;
    f.activations.reserve(spec_.hidden.size() + 1);
    f.activations.push_back(input);
    for (Index k = 0; k < num_hidden(); ++k) {
      const Layer& l = layers_[k];
      Matrix pre = weight(l) * f.activations.back();
      pre.colwise() += bias(l);
      f.activations.push_back(pre.array().tanh().matrix());
    }
    const Matrix& top = f.activations.back();
    f.head = weight(head_layer()) * top;
    f.head.colwise() += bias(head_layer());
    if (spec_.has_value_head()) {
      f.value = weight(value_layer()) * top;
      f.value.array() += bias(value_layer())[0];
    }
    return f;
  }

  /// Reverse-mode pass. `d_head` and `d_value` are the loss derivatives with
  /// respect to the head outputs and values of `fwd`; `d_value` may be empty.
  /// The log-std block of the result is zero; distribution losses fill it.
  Vector backward(const Forward& fwd, const Matrix& d_head, const RowVector& d_value) const {
    Vector grad = Vector::Zero(num_params());
    const Matrix& top = fwd.activations.back();

    auto accumulate = [&](const Layer& l, const Matrix& delta, const Matrix& input) {
      Eigen::Map<Matrix>(grad.data() + l.weight_offset, l.rows, l.cols).noalias() += delta * input.transpose();
      Eigen::Map<Vector>(grad.data() + l.bias_offset, l.rows) += delta.rowwise().sum();
    };

    accumulate(head_layer(), d_head, top);
    Matrix d_hidden = weight(head_layer()).transpose() * d_head;
    if (spec_.has_value_head() && d_value.size() > 0) {
      accumulate(value_layer(), d_value, top);
      d_hidden.noalias() += weight(value_layer()).transpose() * d_value;
    }
    for (Index k = num_hidden() - 1; k >= 0; --k) {
      const Matrix& out = fwd.activations[k + 1];
      const Matrix delta = d_hidden.cwiseProduct((Scalar(1) - out.array().square()).matrix());
      accumulate(layers_[k], delta, fwd.activations[k]);
      if (k > 0) d_hidden = weight(layers_[k]).transpose() * delta;
    }
    return grad;
  }

  /// Orthogonal initialization: gain sqrt(2) on hidden layers, `head_gain`
  /// on the task head, 1 on the value head; zero biases and log-std.
  void initialize(Rng& rng, Scalar head_gain) {
    params_.setZero();
    for (Index k = 0; k < static_cast<Index>(layers_.size()); ++k) {
      Scalar gain = Scalar(1);
      if (k < num_hidden()) gain = std::sqrt(Scalar(2));
      else if (k == num_hidden()) gain = head_gain;
      weight(layers_[k]) = orthogonal(layers_[k].rows, layers_[k].cols, rng) * gain;
    }
  }

 private:
  static Matrix orthogonal(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const bool tall = rows >= cols;
    const Index r = tall ? rows : cols;
    const Index c = tall ? cols : rows;
    Matrix gaussian(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) gaussian(i, j) = static_cast<Scalar>(normal(rng));
    Eigen::HouseholderQR<Matrix> qr(gaussian);
    Matrix q = qr.householderQ() * Matrix::Identity(r, c);
    // Sign fix so the result is uniformly distributed over orthogonal matrices.
    const Matrix rmat = qr.matrixQR().topLeftCorner(c, c).template triangularView<Eigen::Upper>();
    for (Index j = 0; j < c; ++j)
      if (rmat(j, j) < Scalar(0)) q.col(j) = -q.col(j);
    return tall ? q : Matrix(q.transpose());
  }

  NetSpec spec_;
  std::vector<Layer> layers_;
  Index log_std_offset_ = 0;
  Vector params_;
};

}  // namespace annealil::neural
