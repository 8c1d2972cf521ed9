// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "sis/model.hpp"
#include "sis/rng.hpp"

namespace sis {

/// Dimensions of the influence predictor.
///
/// Step-k input is concat(one-hot(a_{k-1}), one-hot(l_k[0]), ..., one-hot(l_k[m-1]));
/// step 0 uses the reserved null action code num_actions.
struct PredictorShape {
  int num_actions = 0;
  std::vector<int> local_card;
  std::vector<int> source_card;
  int hidden = 8;

  int input_dim() const;
  int null_action() const { return num_actions; }
  std::size_t param_count() const;
  friend bool operator==(const PredictorShape&, const PredictorShape&) = default;

  static PredictorShape for_domain(const DomainModel& domain, int hidden = 8);
};

/// GRU weights plus one softmax head per source variable, stored as a single
/// flat vector so optimisers and finite differences see one contiguous block.
///
/// Gates are stacked [update; reset; candidate]:
///   z = sigmoid(Wz x + Uz h + bz), r = sigmoid(Wr x + Ur h + br)
///   n = tanh(Wn x + Un (r * h) + bn), h' = (1 - z) * h + z * n
class PredictorParams {
 public:
  using MatMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

  PredictorParams() = default;
  explicit PredictorParams(PredictorShape shape);

  static PredictorParams zeros(const PredictorShape& shape) { return PredictorParams(shape); }
  /// Uniform in [-scale, scale]; scale <= 0 means 1 / sqrt(hidden).
  static PredictorParams random(const PredictorShape& shape, Rng& rng, double scale = 0.0);

  const PredictorShape& shape() const { return shape_; }
  Eigen::VectorXd& flat() { return theta_; }
  const Eigen::VectorXd& flat() const { return theta_; }

  ConstMatMap input_weights() const { return cmat(w_off_, 3 * h(), in()); }
  ConstMatMap recurrent_weights() const { return cmat(u_off_, 3 * h(), h()); }
  ConstVecMap gate_bias() const { return cvec(b_off_, 3 * h()); }
  ConstMatMap head_weights(int v) const { return cmat(head_w_off_[v], card(v), h()); }
  ConstVecMap head_bias(int v) const { return cvec(head_b_off_[v], card(v)); }

  // Offsets into a flat vector of the same layout (parameters or gradients).
  std::size_t input_weights_offset() const { return w_off_; }
  std::size_t recurrent_weights_offset() const { return u_off_; }
  std::size_t gate_bias_offset() const { return b_off_; }
  std::size_t head_weights_offset(int v) const { return head_w_off_[static_cast<std::size_t>(v)]; }
  std::size_t head_bias_offset(int v) const { return head_b_off_[static_cast<std::size_t>(v)]; }

  int h() const { return shape_.hidden; }
  int in() const { return shape_.input_dim(); }
  int card(int v) const { return shape_.source_card[static_cast<std::size_t>(v)]; }
  int num_sources() const { return static_cast<int>(shape_.source_card.size()); }

 private:
  ConstMatMap cmat(std::size_t off, int rows, int cols) const {
    return ConstMatMap(theta_.data() + off, rows, cols);
  }
  ConstVecMap cvec(std::size_t off, int n) const { return ConstVecMap(theta_.data() + off, n); }

  PredictorShape shape_;
  Eigen::VectorXd theta_;
  std::size_t w_off_ = 0, u_off_ = 0, b_off_ = 0;
  std::vector<std::size_t> head_w_off_, head_b_off_;
};

/// Active one-hot input positions for one step.
std::vector<int> encode_step(const PredictorShape& shape, int prev_action, std::span<const Value> local);

/// Incremental (single sequence) interface used during simulation.
///
/// Buffers are caller-owned so a simulation step allocates nothing.
void gru_step(const PredictorParams& p, std::span<const double> h, std::span<const int> active_inputs,
              std::span<double> h_out);
/// Log-probabilities of every source variable, concatenated per variable.
void head_log_probs(const PredictorParams& p, std::span<const double> h, std::span<double> out);
/// Hidden state after consuming every local state of d (h_{-1} = 0).
std::vector<double> encode_history(const PredictorParams& p, const LocalHistory& d);

/// Padded batch of sequences. targets[t][b * V + v] is the target category of
/// source v at step t; mask[t](b) is 1 for steps that carry a target.
struct SequenceBatch {
  int steps = 0;
  int batch = 0;
  std::vector<Eigen::MatrixXd> inputs;    // steps x (input_dim x batch)
  std::vector<std::vector<int>> targets;  // steps x (batch * V)
  std::vector<Eigen::RowVectorXd> mask;   // steps x (1 x batch)

  double target_count() const;
};

struct ForwardResult {
  std::vector<Eigen::MatrixXd> hidden;                  // steps x (H x batch)
  std::vector<std::vector<Eigen::MatrixXd>> log_probs;  // steps x V x (card x batch)
};

ForwardResult forward(const PredictorParams& p, const SequenceBatch& batch);

/// Mean over unmasked (sequence, step) pairs of sum_v -log p(target_v).
double loss(const PredictorParams& p, const SequenceBatch& batch);

/// Loss and its exact gradient by backpropagation through time.
double loss_and_gradient(const PredictorParams& p, const SequenceBatch& batch, Eigen::VectorXd& grad);

}  // namespace sis
