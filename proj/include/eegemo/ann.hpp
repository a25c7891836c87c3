#pragma once

#include "core.hpp"
#include "dataset.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace eegemo {

struct AnnParams {
  std::vector<int> hidden{32, 16};
  int batch_size = 32;
  double learning_rate = 0.01;
  int epochs = 200;
  std::uint64_t seed = 1;

  void validate() const {
    if (hidden.size() != 2) throw ConfigError("ann: exactly two hidden layers are supported");
    for (int h : hidden)
      if (h < 1) throw ConfigError("ann: hidden layer width must be positive");
    if (batch_size < 1) throw ConfigError("ann: batch size must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("ann: learning rate must be positive");
    if (epochs < 1) throw ConfigError("ann: epochs must be positive");
  }
};

/// Feedforward network d -> h1 -> h2 -> 1 with ReLU hidden layers and a
/// sigmoid output. weights[l] is (inputs x outputs).
struct AnnModel {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  Eigen::Index dimension() const { return weights.empty() ? 0 : weights.front().rows(); }

  std::vector<Eigen::Index> layer_sizes() const {
    std::vector<Eigen::Index> out;
    if (weights.empty()) return out;
    out.push_back(weights.front().rows());
    for (const auto& w : weights) out.push_back(w.cols());
    return out;
  }
};

inline double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// log(1 + e^z) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

namespace detail {

struct Forward {
  std::vector<Matrix> pre;   // pre-activations per layer
  std::vector<Matrix> post;  // post[0] = input, post[l+1] = activation of layer l
};

inline Forward ann_forward(const AnnModel& m, const Matrix& x) {
  Forward f;
  f.post.push_back(x);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    Matrix z = f.post.back() * m.weights[l];
    z.rowwise() += m.biases[l].transpose();
    Matrix a = l + 1 < m.weights.size() ? Matrix(z.cwiseMax(0.0)) : Matrix(z);
    f.pre.push_back(std::move(z));
    f.post.push_back(std::move(a));
  }
  return f;
}

}  // namespace detail

/// Mean binary cross-entropy of the network on (x, y), y in {0, 1}.
inline double ann_loss(const AnnModel& m, const Matrix& x, std::span<const double> y) {
  const auto f = detail::ann_forward(m, x);
  const Matrix& z = f.pre.back();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) acc += softplus(z(i, 0)) - y[static_cast<std::size_t>(i)] * z(i, 0);
  return acc / static_cast<double>(z.rows());
}

struct AnnGradient {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  double loss = 0.0;
};

/// Loss and its gradient by backpropagation.
inline AnnGradient ann_gradient(const AnnModel& m, const Matrix& x, std::span<const double> y) {
  const auto f = detail::ann_forward(m, x);
  const auto rows = x.rows();
  const double inv = 1.0 / static_cast<double>(rows);
  AnnGradient g;
  g.weights.resize(m.weights.size());
  g.biases.resize(m.biases.size());
  Matrix delta(rows, 1);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double z = f.pre.back()(i, 0);
    const double t = y[static_cast<std::size_t>(i)];
    g.loss += softplus(z) - t * z;
    delta(i, 0) = (sigmoid(z) - t) * inv;
  }
  g.loss *= inv;
  for (auto l = static_cast<std::ptrdiff_t>(m.weights.size()) - 1; l >= 0; --l) {
    const auto lu = static_cast<std::size_t>(l);
    g.weights[lu] = f.post[lu].transpose() * delta;
    g.biases[lu] = delta.colwise().sum().transpose();
    if (l > 0) {
      Matrix back = delta * m.weights[lu].transpose();
      delta = back.array() * (f.pre[lu - 1].array() > 0.0).cast<double>();
    }
  }
  return g;
}

/// Zero biases; weights uniform in +-sqrt(6 / (fan_in + fan_out)).
inline AnnModel ann_init(Eigen::Index inputs, const AnnParams& params) {
  params.validate();
  if (inputs < 1) throw InputError("ann: need at least one input feature");
  Rng rng(params.seed);
  AnnModel m;
  std::vector<Eigen::Index> sizes{inputs, params.hidden[0], params.hidden[1], 1};
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
    Matrix w(sizes[l], sizes[l + 1]);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-limit, limit);
    m.weights.push_back(std::move(w));
    m.biases.push_back(Vector::Zero(sizes[l + 1]));
  }
  return m;
}

struct AnnTrainResult {
  AnnModel model;
  std::vector<double> loss_history;  // full training loss after each epoch
  double final_learning_rate = 0.0;
};

/// Mini-batch gradient descent on binary cross-entropy. After each epoch the
/// full training loss is evaluated; if it rose, the epoch is rolled back and
/// the learning rate halved, so the recorded loss never increases.
inline AnnTrainResult ann_train(const Matrix& x, std::span<const double> y, const AnnParams& params) {
  params.validate();
  const auto n = x.rows();
  if (static_cast<Eigen::Index>(y.size()) != n) throw InputError("ann: label count does not match rows");
  bool pos = false, neg = false;
  for (double v : y) {
    if (v == 1.0)
      pos = true;
    else if (v == 0.0)
      neg = true;
    else
      throw InputError("ann: labels must be 0 or 1");
  }
  if (!pos || !neg) throw InputError("ann: need at least one sample of each class");
  if (!x.allFinite()) throw NumericalError("ann: non-finite training features");

  AnnTrainResult out;
  out.model = ann_init(x.cols(), params);
  Rng rng(mix_seed(params.seed, 1));
  double lr = params.learning_rate;
  double prev = ann_loss(out.model, x, y);
  if (!std::isfinite(prev)) throw NumericalError("ann: non-finite initial loss");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  const auto batch = static_cast<Eigen::Index>(params.batch_size);
  Matrix xb;
  std::vector<double> yb;

  for (int epoch = 1; epoch <= params.epochs; ++epoch) {
    AnnModel snapshot = out.model;
    rng.shuffle(order);
    for (Eigen::Index start = 0; start < n; start += batch) {
      const auto len = std::min(batch, n - start);
      xb.resize(len, x.cols());
      yb.resize(static_cast<std::size_t>(len));
      for (Eigen::Index r = 0; r < len; ++r) {
        const auto src = order[static_cast<std::size_t>(start + r)];
        xb.row(r) = x.row(src);
        yb[static_cast<std::size_t>(r)] = y[static_cast<std::size_t>(src)];
      }
      const auto g = ann_gradient(out.model, xb, yb);
      for (std::size_t l = 0; l < out.model.weights.size(); ++l) {
        out.model.weights[l] -= lr * g.weights[l];
        out.model.biases[l] -= lr * g.biases[l];
      }
    }
    const double loss = ann_loss(out.model, x, y);
    if (!std::isfinite(loss))
      throw NumericalError("ann: training diverged (non-finite loss) at epoch " + std::to_string(epoch));
    if (loss > prev) {
      out.model = std::move(snapshot);
      lr *= 0.5;
    } else {
      prev = loss;
    }
    out.loss_history.push_back(prev);
  }
  out.final_learning_rate = lr;
  return out;
}

struct AnnPrediction {
  Level label;
  double probability;
};

template <typename Derived>
AnnPrediction ann_predict(const AnnModel& m, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != m.dimension())
    throw InputError("ann_predict: expected " + std::to_string(m.dimension()) + " features, got " +
                     std::to_string(x.size()));
  Matrix row = x.derived().reshaped().transpose();
  const auto f = detail::ann_forward(m, row);
  const double p = sigmoid(f.pre.back()(0, 0));
  return {p > 0.5 ? Level::high : Level::low, p};
}

/// Probabilities for every row of `x`.
inline Vector ann_predict_batch(const AnnModel& m, const Matrix& x) {
  if (x.cols() != m.dimension()) throw InputError("ann_predict: dimension mismatch");
  const auto f = detail::ann_forward(m, x);
  Vector p(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) p[i] = sigmoid(f.pre.back()(i, 0));
  return p;
}

}  // namespace eegemo
