// Copyright 2026 The derivnet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/// @file network.hpp
/// Fully connected perceptron: linear input layer, sigmoid hidden layers and
/// a single linear output neuron.
///
/// Parameters live in one flat array. For each weight layer l (senders
/// layers[l-1], receivers layers[l]) the array holds the receiver x sender
/// weight matrix in row-major order followed by the receiver thresholds.
/// A threshold is added to the weighted sum before activation:
/// z_r = sum_s w_rs a_s + b_r.

#ifndef DERIVNET_NETWORK_HPP
#define DERIVNET_NETWORK_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "derivnet/errors.hpp"
#include "derivnet/jet.hpp"
#include "derivnet/lane_kernels.hpp"

namespace derivnet {

enum class Precision { single, double_ };

inline const char *name(Precision p) { return p == Precision::single ? "single" : "double"; }

struct NetworkConfig {
  std::vector<int> layers;
  Precision precision = Precision::single;

  void validate() const {
    detail::require(layers.size() >= 3, "network: need input, at least one hidden and an output layer");
    for (int n : layers)
      detail::require(n > 0, "network: layer sizes must be positive");
    detail::require(layers.back() == 1, "network: output layer must have exactly one neuron");
  }
  int input_dim() const { return layers.front(); }
  std::size_t weight_layers() const { return layers.size() - 1; }

  /// "2,64,64,1" style identifier.
  std::string id() const {
    std::string s;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (i)
        s += ',';
      s += std::to_string(layers[i]);
    }
    return s;
  }
};

/// Number of connection weights, thresholds excluded.
inline std::size_t count_weights(const NetworkConfig &cfg) {
  cfg.validate();
  std::size_t n = 0;
  for (std::size_t l = 1; l < cfg.layers.size(); ++l)
    n += static_cast<std::size_t>(cfg.layers[l - 1]) * cfg.layers[l];
  return n;
}

inline std::size_t count_thresholds(const NetworkConfig &cfg) {
  cfg.validate();
  std::size_t n = 0;
  for (std::size_t l = 1; l < cfg.layers.size(); ++l)
    n += cfg.layers[l];
  return n;
}

template <class T> class Params {
public:
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  explicit Params(NetworkConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    std::size_t off = 0;
    for (std::size_t l = 1; l < cfg_.layers.size(); ++l) {
      weight_off_.push_back(off);
      off += static_cast<std::size_t>(cfg_.layers[l - 1]) * cfg_.layers[l];
      threshold_off_.push_back(off);
      off += cfg_.layers[l];
    }
    data_.assign(off, T(0));
    clamp_mask_.assign(off, 0);
    for (std::size_t l = 0; l + 1 < cfg_.layers.size(); ++l)
      for (std::size_t i = weight_off_[l]; i < threshold_off_[l]; ++i)
        clamp_mask_[i] = 1;
  }

  const NetworkConfig &config() const noexcept { return cfg_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  /// 1 for connection weights, 0 for thresholds.
  std::span<const std::uint8_t> clamp_mask() const noexcept { return clamp_mask_; }

  /// Weight layer `l` in 0..layers-2, feeding layer l+1.
  std::size_t weight_offset(std::size_t l) const { return weight_off_.at(l); }
  std::size_t threshold_offset(std::size_t l) const { return threshold_off_.at(l); }

  MatrixMap weights(std::size_t l) {
    return MatrixMap(data_.data() + weight_off_.at(l), cfg_.layers[l + 1], cfg_.layers[l]);
  }
  ConstMatrixMap weights(std::size_t l) const {
    return ConstMatrixMap(data_.data() + weight_off_.at(l), cfg_.layers[l + 1], cfg_.layers[l]);
  }
  VectorMap thresholds(std::size_t l) {
    return VectorMap(data_.data() + threshold_off_.at(l), cfg_.layers[l + 1]);
  }
  ConstVectorMap thresholds(std::size_t l) const {
    return ConstVectorMap(data_.data() + threshold_off_.at(l), cfg_.layers[l + 1]);
  }

  template <class U> Params<U> cast() const {
    Params<U> r(cfg_);
    for (std::size_t i = 0; i < data_.size(); ++i)
      r.values()[i] = static_cast<U>(data_[i]);
    return r;
  }

  bool operator==(const Params &o) const { return cfg_.layers == o.cfg_.layers && data_ == o.data_; }

private:
  NetworkConfig cfg_;
  std::vector<T> data_;
  std::vector<std::uint8_t> clamp_mask_;
  std::vector<std::size_t> weight_off_;
  std::vector<std::size_t> threshold_off_;
};

/// Weights uniform in +-2/sqrt(senders), thresholds uniform in +-0.1.
/// Draws happen in double and are rounded to T, so single and double
/// parameter sets from the same seed agree up to rounding.
template <class T, class Rng> Params<T> init_params(const NetworkConfig &cfg, Rng &rng) {
  Params<T> p(cfg);
  for (std::size_t l = 0; l + 1 < cfg.layers.size(); ++l) {
    const double bound = 2.0 / std::sqrt(static_cast<double>(cfg.layers[l]));
    std::uniform_real_distribution<double> wdist(-bound, bound);
    std::uniform_real_distribution<double> tdist(-0.1, 0.1);
    auto w = p.weights(l);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        w(r, c) = static_cast<T>(wdist(rng));
    auto b = p.thresholds(l);
    for (Eigen::Index r = 0; r < b.size(); ++r)
      b(r) = static_cast<T>(tdist(rng));
  }
  return p;
}

/// Plain forward pass. Sums senders in order and then adds the threshold,
/// the same order forward_jets() uses, so both agree bit for bit.
template <class T> T forward(const Params<T> &params, std::span<const T> x) {
  const auto &layers = params.config().layers;
  detail::require(x.size() == static_cast<std::size_t>(layers.front()), "forward: input dimension mismatch");
  std::vector<T> a(x.begin(), x.end()), z;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const auto w = params.weights(l);
    const auto b = params.thresholds(l);
    const bool hidden = l + 2 < layers.size();
    z.assign(layers[l + 1], T(0));
    for (int r = 0; r < layers[l + 1]; ++r) {
      T acc = T(0);
      for (int s = 0; s < layers[l]; ++s)
        acc += w(r, s) * a[s];
      acc += b(r);
      z[r] = hidden ? sigmoid(acc) : acc;
    }
    a.swap(z);
  }
  return a[0];
}

/// Per-layer jets recorded by forward_jets(): `pre[l]` are the weighted sums
/// of layer l+1, `post[l]` its activations.
template <class T> struct ForwardTape {
  std::vector<std::vector<Jet<T>>> pre;
  std::vector<std::vector<Jet<T>>> post;
};

/// Output jet along the input axes `directions` (one per jet slot).
///
/// Reference path built from Jet arithmetic and compose(); the training code
/// uses BatchPropagator instead.
template <class T>
Jet<T> forward_jets(const Params<T> &params, std::span<const T> x, const JetSpec &spec,
                    std::span<const int> directions, ForwardTape<T> *tape = nullptr) {
  const auto &layers = params.config().layers;
  validate(spec);
  detail::require(x.size() == static_cast<std::size_t>(layers.front()), "forward_jets: input dimension mismatch");
  detail::require(directions.size() == static_cast<std::size_t>(spec.arity),
                  "forward_jets: need one direction per jet slot");
  for (int d : directions)
    detail::require(d >= 0 && d < layers.front(), "forward_jets: direction index out of range");

  std::vector<Jet<T>> a;
  for (int i = 0; i < layers.front(); ++i) {
    Jet<T> j = Jet<T>::constant(spec, x[i]);
    for (int slot = 0; slot < spec.arity; ++slot)
      if (directions[slot] == i)
        j += Jet<T>::variable(spec, T(0), slot);
    a.push_back(j);
  }
  if (tape) {
    tape->pre.clear();
    tape->post.clear();
  }
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const auto w = params.weights(l);
    const auto b = params.thresholds(l);
    const bool hidden = l + 2 < layers.size();
    std::vector<Jet<T>> z, out;
    for (int r = 0; r < layers[l + 1]; ++r) {
      Jet<T> acc(spec);
      for (int s = 0; s < layers[l]; ++s)
        acc += a[s] * w(r, s);
      acc[0] += b(r);
      z.push_back(acc);
      out.push_back(hidden ? compose(Elementary::sigmoid, acc) : acc);
    }
    if (tape) {
      tape->pre.push_back(z);
      tape->post.push_back(out);
    }
    a.swap(out);
  }
  return a[0];
}

/// Propagates Q jet lanes of one spec through the network at once and
/// back-propagates cotangents of the output coefficients onto the parameters.
///
/// Every layer's jets form a row-major (neurons x C*Q) block with lane q's
/// coefficient i at column i*Q + q. Affine layers are one GEMM over all
/// columns; the threshold only touches the constant block [0, Q).
template <class T> class BatchPropagator {
public:
  using Block = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  BatchPropagator(const NetworkConfig &cfg, const JetSpec &spec, std::size_t lanes)
      : layers_(cfg.layers), spec_(spec), tab_(&JetTables::get(spec)), Q_(lanes), C_(spec.size()) {
    cfg.validate();
    detail::require(lanes > 0, "batch: need at least one lane");
    const auto cols = static_cast<Eigen::Index>(C_ * Q_);
    act_.resize(layers_.size());
    slope_.resize(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      act_[l] = Block::Zero(layers_[l], cols);
      if (l > 0 && l + 1 < layers_.size())
        slope_[l].resize(layers_[l], cols);
    }
  }

  const JetSpec &spec() const noexcept { return spec_; }
  std::size_t lanes() const noexcept { return Q_; }
  std::size_t coefficients() const noexcept { return C_; }

  /// Input jets of lane q: x_i plus a unit first-order coefficient in slot j
  /// for the input i == directions[j].
  template <class U> void seed_lane(std::size_t q, std::span<const U> x, std::span<const int> directions) {
    detail::require(q < Q_, "batch: lane out of range");
    detail::require(x.size() == static_cast<std::size_t>(layers_.front()), "batch: input dimension mismatch");
    detail::require(directions.size() == static_cast<std::size_t>(spec_.arity), "batch: one direction per slot");
    Block &in = act_[0];
    for (Eigen::Index i = 0; i < in.rows(); ++i) {
      for (std::size_t c = 0; c < C_; ++c)
        in(i, c * Q_ + q) = T(0);
      in(i, q) = static_cast<T>(x[i]);
    }
    if (spec_.degree == 0)
      return;
    for (int slot = 0; slot < spec_.arity; ++slot) {
      const int d = directions[slot];
      detail::require(d >= 0 && d < layers_.front(), "batch: direction index out of range");
      const std::size_t c = slot == 0 ? 1 : 2;
      in(d, c * Q_ + q) = T(1);
    }
  }

  /// Returns the (1 x C*Q) output block.
  const Block &forward(const Params<T> &params) {
    check(params);
    const std::size_t L = layers_.size();
    for (std::size_t l = 1; l < L; ++l) {
      const bool hidden = l + 1 < L;
      Block &z = hidden ? scratch_ : act_[l];
      z.noalias() = params.weights(l - 1) * act_[l - 1];
      z.leftCols(Q_).colwise() += params.thresholds(l - 1);
      if (hidden) {
        for (Eigen::Index r = 0; r < z.rows(); ++r)
          lanes::sigmoid_forward(*tab_, Q_, z.row(r).data(), act_[l].row(r).data(), slope_[l].row(r).data());
      }
    }
    return act_.back();
  }

  const Block &output() const noexcept { return act_.back(); }
  T output(std::size_t coef, std::size_t q) const { return act_.back()(0, coef * Q_ + q); }

  /// Overwrites `grad` (aligned with Params) with the gradient of
  /// sum_k output_adjoint[k] * output[k]. Requires a preceding forward().
  void backward(const Params<T> &params, const Block &output_adjoint, std::span<T> grad) {
    check(params);
    detail::require(grad.size() == params.size(), "batch: gradient size mismatch");
    detail::require(output_adjoint.rows() == 1 && output_adjoint.cols() == act_.back().cols(),
                    "batch: output adjoint shape mismatch");
    const std::size_t L = layers_.size();
    zbar_ = output_adjoint;
    for (std::size_t l = L - 1; l >= 1; --l) {
      typename Params<T>::MatrixMap gw(grad.data() + params.weight_offset(l - 1), layers_[l], layers_[l - 1]);
      typename Params<T>::VectorMap gb(grad.data() + params.threshold_offset(l - 1), layers_[l]);
      gw.noalias() = zbar_ * act_[l - 1].transpose();
      gb = zbar_.leftCols(Q_).rowwise().sum();
      if (l == 1)
        break;
      abar_.noalias() = params.weights(l - 1).transpose() * zbar_;
      zbar_.resize(abar_.rows(), abar_.cols());
      for (Eigen::Index r = 0; r < abar_.rows(); ++r)
        lanes::compose_adjoint(*tab_, Q_, abar_.row(r).data(), slope_[l - 1].row(r).data(), zbar_.row(r).data(),
                               corrupt_adjoint_ && l - 1 == 1);
    }
  }

  /// Negative-control switch for gradient checking: perturbs the adjoint of
  /// the first hidden layer's activation.
  void set_corrupt_adjoint(bool on) noexcept { corrupt_adjoint_ = on; }

private:
  void check(const Params<T> &params) const {
    detail::require(params.config().layers == layers_, "batch: parameters belong to a different network");
  }

  std::vector<int> layers_;
  JetSpec spec_;
  const JetTables *tab_;
  std::size_t Q_;
  std::size_t C_;
  std::vector<Block> act_;
  std::vector<Block> slope_;
  Block scratch_, zbar_, abar_;
  bool corrupt_adjoint_ = false;
};

} // namespace derivnet

#endif
