// SPDX-License-Identifier: Apache-2.0
#include "sis/gru.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sis {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void log_softmax_inplace(std::span<double> v) {
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - mx);
  const double lse = mx + std::log(sum);
  for (double& x : v) x -= lse;
}

Eigen::MatrixXd log_softmax_cols(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out = logits;
  for (Eigen::Index b = 0; b < out.cols(); ++b) {
    std::span<double> col(out.col(b).data(), static_cast<std::size_t>(out.rows()));
    log_softmax_inplace(col);
  }
  return out;
}

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& x) { return 1.0 / (1.0 + (-x).exp()); }

// Per-step activations kept for the backward pass.
struct StepCache {
  Eigen::MatrixXd h_prev, z, r, n, h;
};

std::vector<StepCache> run_forward(const PredictorParams& p, const SequenceBatch& batch) {
  const int H = p.h();
  const auto W = p.input_weights();
  const auto U = p.recurrent_weights();
  const auto bias = p.gate_bias();
  std::vector<StepCache> cache(static_cast<std::size_t>(batch.steps));
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(H, batch.batch);
  for (int t = 0; t < batch.steps; ++t) {
    auto& c = cache[static_cast<std::size_t>(t)];
    const auto& x = batch.inputs[static_cast<std::size_t>(t)];
    Eigen::MatrixXd a = W * x;
    a.colwise() += bias;
    a.topRows(2 * H).noalias() += U.topRows(2 * H) * h;
    c.z = sigmoid(a.topRows(H).array()).matrix();
    c.r = sigmoid(a.middleRows(H, H).array()).matrix();
    const Eigen::MatrixXd q = c.r.cwiseProduct(h);
    c.n = (a.bottomRows(H) + U.bottomRows(H) * q).array().tanh().matrix();
    c.h_prev = h;
    h = (1.0 - c.z.array()) * h.array() + c.z.array() * c.n.array();
    c.h = h;
  }
  return cache;
}

}  // namespace

int PredictorShape::input_dim() const {
  return num_actions + 1 + std::accumulate(local_card.begin(), local_card.end(), 0);
}

std::size_t PredictorShape::param_count() const {
  const std::size_t in = static_cast<std::size_t>(input_dim());
  const std::size_t H = static_cast<std::size_t>(hidden);
  std::size_t n = 3 * H * in + 3 * H * H + 3 * H;
  for (int c : source_card) n += static_cast<std::size_t>(c) * (H + 1);
  return n;
}

PredictorShape PredictorShape::for_domain(const DomainModel& domain, int hidden) {
  PredictorShape s;
  s.num_actions = domain.num_actions();
  auto lc = domain.local_cardinalities();
  auto sc = domain.source_cardinalities();
  s.local_card.assign(lc.begin(), lc.end());
  s.source_card.assign(sc.begin(), sc.end());
  s.hidden = hidden;
  return s;
}

PredictorParams::PredictorParams(PredictorShape shape) : shape_(std::move(shape)) {
  if (shape_.hidden < 1 || shape_.num_actions < 1)
    throw std::invalid_argument("PredictorParams: hidden size and action count must be positive");
  const std::size_t H = static_cast<std::size_t>(h());
  const std::size_t I = static_cast<std::size_t>(in());
  w_off_ = 0;
  u_off_ = w_off_ + 3 * H * I;
  b_off_ = u_off_ + 3 * H * H;
  std::size_t off = b_off_ + 3 * H;
  for (int c : shape_.source_card) {
    head_w_off_.push_back(off);
    off += static_cast<std::size_t>(c) * H;
    head_b_off_.push_back(off);
    off += static_cast<std::size_t>(c);
  }
  theta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(off));
}

PredictorParams PredictorParams::random(const PredictorShape& shape, Rng& rng, double scale) {
  PredictorParams p(shape);
  if (scale <= 0.0) scale = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
  for (Eigen::Index i = 0; i < p.theta_.size(); ++i) p.theta_[i] = rng.uniform(-scale, scale);
  return p;
}

std::vector<int> encode_step(const PredictorShape& shape, int prev_action, std::span<const Value> local) {
  if (local.size() != shape.local_card.size())
    throw std::invalid_argument("encode_step: local state has wrong dimension");
  std::vector<int> active;
  active.reserve(local.size() + 1);
  active.push_back(prev_action < 0 ? shape.null_action() : prev_action);
  int offset = shape.num_actions + 1;
  for (std::size_t i = 0; i < local.size(); ++i) {
    active.push_back(offset + local[i]);
    offset += shape.local_card[i];
  }
  return active;
}

void gru_step(const PredictorParams& p, std::span<const double> h, std::span<const int> active,
              std::span<double> h_out) {
  const int H = p.h();
  const auto& theta = p.flat();
  const double* W = theta.data() + p.input_weights_offset();
  const double* U = theta.data() + p.recurrent_weights_offset();
  const double* b = theta.data() + p.gate_bias_offset();
  const int rows = 3 * H;
  double a[3 * 64];
  double q[64];
  if (H > 64) throw std::invalid_argument("gru_step: hidden size above 64 is not supported");
  for (int i = 0; i < rows; ++i) a[i] = b[i];
  for (int col : active) {
    const double* wc = W + static_cast<std::size_t>(col) * rows;
    for (int i = 0; i < rows; ++i) a[i] += wc[i];
  }
  // Column-major U: element (i, j) at U[j * rows + i].
  for (int j = 0; j < H; ++j) {
    const double hj = h[static_cast<std::size_t>(j)];
    const double* uc = U + static_cast<std::size_t>(j) * rows;
    for (int i = 0; i < 2 * H; ++i) a[i] += uc[i] * hj;
  }
  for (int i = 0; i < H; ++i) q[i] = sigmoid(a[H + i]) * h[static_cast<std::size_t>(i)];
  for (int j = 0; j < H; ++j) {
    const double* uc = U + static_cast<std::size_t>(j) * rows + 2 * H;
    for (int i = 0; i < H; ++i) a[2 * H + i] += uc[i] * q[j];
  }
  for (int i = 0; i < H; ++i) {
    const double z = sigmoid(a[i]);
    const double n = std::tanh(a[2 * H + i]);
    h_out[static_cast<std::size_t>(i)] = (1.0 - z) * h[static_cast<std::size_t>(i)] + z * n;
  }
}

void head_log_probs(const PredictorParams& p, std::span<const double> h, std::span<double> out) {
  const int H = p.h();
  std::size_t pos = 0;
  for (int v = 0; v < p.num_sources(); ++v) {
    const int C = p.card(v);
    const double* Vw = p.flat().data() + p.head_weights_offset(v);
    const double* c = p.flat().data() + p.head_bias_offset(v);
    std::span<double> logits = out.subspan(pos, static_cast<std::size_t>(C));
    for (int k = 0; k < C; ++k) logits[static_cast<std::size_t>(k)] = c[k];
    for (int j = 0; j < H; ++j) {
      const double hj = h[static_cast<std::size_t>(j)];
      for (int k = 0; k < C; ++k) logits[static_cast<std::size_t>(k)] += Vw[j * C + k] * hj;
    }
    log_softmax_inplace(logits);
    pos += static_cast<std::size_t>(C);
  }
}

std::vector<double> encode_history(const PredictorParams& p, const LocalHistory& d) {
  std::vector<double> h(static_cast<std::size_t>(p.h()), 0.0), next(h.size());
  for (std::size_t k = 0; k < d.length(); ++k) {
    const int prev = k == 0 ? -1 : d.action(k - 1);
    const auto active = encode_step(p.shape(), prev, d.local(k));
    gru_step(p, h, active, next);
    h.swap(next);
  }
  return h;
}

double SequenceBatch::target_count() const {
  double n = 0.0;
  for (const auto& m : mask) n += m.sum();
  return n;
}

ForwardResult forward(const PredictorParams& p, const SequenceBatch& batch) {
  const auto cache = run_forward(p, batch);
  ForwardResult out;
  for (const auto& c : cache) {
    out.hidden.push_back(c.h);
    std::vector<Eigen::MatrixXd> per_var;
    for (int v = 0; v < p.num_sources(); ++v) {
      Eigen::MatrixXd logits = p.head_weights(v) * c.h;
      logits.colwise() += p.head_bias(v);
      per_var.push_back(log_softmax_cols(logits));
    }
    out.log_probs.push_back(std::move(per_var));
  }
  return out;
}

double loss(const PredictorParams& p, const SequenceBatch& batch) {
  const double count = batch.target_count();
  if (count == 0.0) return 0.0;
  const auto fwd = forward(p, batch);
  const int V = p.num_sources();
  double total = 0.0;
  for (int t = 0; t < batch.steps; ++t)
    for (int b = 0; b < batch.batch; ++b) {
      if (batch.mask[static_cast<std::size_t>(t)](b) == 0.0) continue;
      for (int v = 0; v < V; ++v) {
        const int target = batch.targets[static_cast<std::size_t>(t)][static_cast<std::size_t>(b * V + v)];
        total -= fwd.log_probs[static_cast<std::size_t>(t)][static_cast<std::size_t>(v)](target, b);
      }
    }
  return total / count;
}

double loss_and_gradient(const PredictorParams& p, const SequenceBatch& batch, Eigen::VectorXd& grad) {
  grad = Eigen::VectorXd::Zero(p.flat().size());
  const double count = batch.target_count();
  if (count == 0.0) return 0.0;
  const int H = p.h();
  const int V = p.num_sources();
  const auto cache = run_forward(p, batch);
  const auto U = p.recurrent_weights();

  auto gmat = [&](std::size_t off, int rows, int cols) {
    return PredictorParams::MatMap(grad.data() + off, rows, cols);
  };
  auto gvec = [&](std::size_t off, int n) { return PredictorParams::VecMap(grad.data() + off, n); };
  auto dW = gmat(p.input_weights_offset(), 3 * H, p.in());
  auto dU = gmat(p.recurrent_weights_offset(), 3 * H, H);
  auto db = gvec(p.gate_bias_offset(), 3 * H);

  const double scale = 1.0 / count;
  double total = 0.0;
  Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(H, batch.batch);
  Eigen::MatrixXd dA(3 * H, batch.batch);
  for (int t = batch.steps - 1; t >= 0; --t) {
    const auto& c = cache[static_cast<std::size_t>(t)];
    const auto& mask = batch.mask[static_cast<std::size_t>(t)];
    Eigen::MatrixXd dh = dh_next;
    for (int v = 0; v < V; ++v) {
      Eigen::MatrixXd logits = p.head_weights(v) * c.h;
      logits.colwise() += p.head_bias(v);
      const Eigen::MatrixXd logp = log_softmax_cols(logits);
      Eigen::MatrixXd dlogits = logp.array().exp().matrix();
      for (int b = 0; b < batch.batch; ++b) {
        if (mask(b) == 0.0) {
          dlogits.col(b).setZero();
          continue;
        }
        const int target = batch.targets[static_cast<std::size_t>(t)][static_cast<std::size_t>(b * V + v)];
        total -= logp(target, b);
        dlogits(target, b) -= 1.0;
        dlogits.col(b) *= scale;
      }
      gmat(p.head_weights_offset(v), p.card(v), H).noalias() += dlogits * c.h.transpose();
      gvec(p.head_bias_offset(v), p.card(v)) += dlogits.rowwise().sum();
      dh.noalias() += p.head_weights(v).transpose() * dlogits;
    }
    // GRU cell backward.
    const Eigen::ArrayXXd z = c.z.array(), r = c.r.array(), n = c.n.array(), hp = c.h_prev.array();
    const Eigen::ArrayXXd dha = dh.array();
    const Eigen::ArrayXXd dpre_n = dha * z * (1.0 - n * n);
    const Eigen::ArrayXXd dpre_z = dha * (n - hp) * z * (1.0 - z);
    const Eigen::MatrixXd q = (r * hp).matrix();
    const Eigen::ArrayXXd dq = (U.bottomRows(H).transpose() * dpre_n.matrix()).array();
    const Eigen::ArrayXXd dpre_r = dq * hp * r * (1.0 - r);
    dA.topRows(H) = dpre_z.matrix();
    dA.middleRows(H, H) = dpre_r.matrix();
    dA.bottomRows(H) = dpre_n.matrix();

    dU.topRows(2 * H).noalias() += dA.topRows(2 * H) * c.h_prev.transpose();
    dU.bottomRows(H).noalias() += dA.bottomRows(H) * q.transpose();
    dW.noalias() += dA * batch.inputs[static_cast<std::size_t>(t)].transpose();
    db += dA.rowwise().sum();

    dh_next = (dha * (1.0 - z) + dq * r).matrix();
    dh_next.noalias() += U.topRows(2 * H).transpose() * dA.topRows(2 * H);
  }
  return total / count;
}

}  // namespace sis
