#pragma once

// Small dense/convolutional/recurrent building blocks with hand-written
// backward passes. Templated on the scalar type: float for training, double
// for gradient checking.

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mapel/rng.hpp"

namespace mapel::nn {

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
struct Tensor {
  std::string name;
  Matrix<T> value;
};

/// Ordered, named parameter tensors. Order is part of the checkpoint format.
template <class T>
class ParamSet {
 public:
  Matrix<T>& add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    tensors_.push_back({std::move(name), Matrix<T>::Zero(rows, cols)});
    return tensors_.back().value;
  }

  std::size_t size() const { return tensors_.size(); }
  Tensor<T>& operator[](std::size_t i) { return tensors_[i]; }
  const Tensor<T>& operator[](std::size_t i) const { return tensors_[i]; }
  Matrix<T>& value(std::size_t i) { return tensors_[i].value; }
  const Matrix<T>& value(std::size_t i) const { return tensors_[i].value; }

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
    return n;
  }

  /// Element `k` of the concatenation of all tensors.
  T& flat(std::size_t k) {
    for (auto& t : tensors_) {
      const auto n = static_cast<std::size_t>(t.value.size());
      if (k < n) return t.value.data()[k];
      k -= n;
    }
    return tensors_.back().value.data()[0];
  }

  ParamSet zeros_like() const {
    ParamSet out;
    for (const auto& t : tensors_) out.add(t.name, t.value.rows(), t.value.cols());
    return out;
  }

  void set_zero() {
    for (auto& t : tensors_) t.value.setZero();
  }

  bool same_shape(const ParamSet& other) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (tensors_[i].value.rows() != other.value(i).rows() || tensors_[i].value.cols() != other.value(i).cols()) {
        return false;
      }
    }
    return true;
  }

  template <class U>
  ParamSet<U> cast() const {
    ParamSet<U> out;
    for (const auto& t : tensors_) out.add(t.name, t.value.rows(), t.value.cols()) = t.value.template cast<U>();
    return out;
  }

 private:
  std::vector<Tensor<T>> tensors_;
};

/// Two 3x3 stride-2 convolutions (padding 1) with rectified-linear outputs.
struct ConvShape {
  int channels = 5;
  int rows = 32;
  int cols = 32;
  int maps1 = 16;
  int maps2 = 32;

  int rows1() const { return (rows - 1) / 2 + 1; }
  int cols1() const { return (cols - 1) / 2 + 1; }
  int rows2() const { return (rows1() - 1) / 2 + 1; }
  int cols2() const { return (cols1() - 1) / 2 + 1; }
  int input_dim() const { return channels * rows * cols; }
  int embedding_dim() const { return rows2() * cols2() * maps2; }
};

/// Per-agent recurrent action-value network: encoder, gated recurrent cell
/// over [embedding, report], affine head.
struct RecurrentQShape {
  ConvShape encoder;
  int report_width = 0;
  int hidden = 128;
  int actions = 5;

  int cell_input_dim() const { return encoder.embedding_dim() + report_width; }
};

/// Joint action-value network over the product action space of a team.
struct JointQShape {
  ConvShape encoder;
  int agents = 2;
  int actions = 5;
  int hidden = 128;

  int outputs() const {
    int n = 1;
    for (int i = 0; i < agents; ++i) n *= actions;
    return n;
  }
};

template <class T>
ParamSet<T> init_recurrent_params(const RecurrentQShape& shape, Rng& rng);

template <class T>
ParamSet<T> init_joint_params(const JointQShape& shape, Rng& rng);

/// Throws ShapeMismatch unless `params` has the layout `shape` implies.
template <class T>
void check_recurrent_params(const RecurrentQShape& shape, const ParamSet<T>& params);
template <class T>
void check_joint_params(const JointQShape& shape, const ParamSet<T>& params);

template <class T>
struct StepOutput {
  Matrix<T> q;       // [batch, actions]
  Matrix<T> hidden;  // [batch, hidden]
};

/// One recurrent step for a batch of agents. `observations` is
/// [batch, input_dim] in plane-major order, `reports` [batch, report_width].
template <class T>
StepOutput<T> recurrent_step(const RecurrentQShape& shape, const ParamSet<T>& params, const Matrix<T>& observations,
                             const Matrix<T>& hidden, const Matrix<T>& reports);

/// Action values along `length` steps of `batch` sequences, each starting
/// from a zero hidden state. Rows are time-major (row = t * batch + b).
/// With `lengths`, steps at or past a sequence's length are padding: not
/// encoded, and their output rows are unspecified.
template <class T>
Matrix<T> recurrent_sequence_q(const RecurrentQShape& shape, const ParamSet<T>& params,
                               const Matrix<T>& observations, const Matrix<T>& reports, int length, int batch,
                               std::span<const int> lengths = {});

template <class T>
Matrix<T> joint_q(const JointQShape& shape, const ParamSet<T>& params, const Matrix<T>& inputs);

/// Regression batch over recurrent sequences. Rows are time-major; `mask`
/// zeroes padded steps of sequences shorter than `length`.
template <class T>
struct SequenceBatch {
  int length = 0;
  int batch = 0;
  Matrix<T> observations;
  Matrix<T> reports;
  std::vector<int> actions;
  std::vector<T> targets;
  std::vector<T> mask;
};

template <class T>
struct JointBatch {
  Matrix<T> inputs;
  std::vector<int> actions;
  std::vector<T> targets;
};

template <class T>
struct LossAndGrads {
  T loss = 0;
  ParamSet<T> grads;
};

/// Mean Huber loss (threshold 1) between Q(s, a) and the targets, with
/// exact gradients. Throws NonFiniteLoss on divergence.
template <class T>
LossAndGrads<T> recurrent_loss_and_grads(const RecurrentQShape& shape, const ParamSet<T>& params,
                                         const SequenceBatch<T>& batch);

template <class T>
LossAndGrads<T> joint_loss_and_grads(const JointQShape& shape, const ParamSet<T>& params, const JointBatch<T>& batch);

template <class T>
T huber(T delta);

}  // namespace mapel::nn
