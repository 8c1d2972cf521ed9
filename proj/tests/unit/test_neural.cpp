#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "common.hpp"
#include "sis/adam.hpp"
#include "sis/gru.hpp"
#include "sis/influence.hpp"
#include "sis/training.hpp"

using namespace sis;
using sis::testing::random_sequence;
using sis::testing::tiny_gac;

namespace {

std::vector<TrainingSequence> random_sequences(const DomainModel& dom, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TrainingSequence> out;
  for (int i = 0; i < n; ++i) out.push_back(random_sequence(dom, rng, 3, 4));
  return out;
}

}  // namespace

TEST_CASE("zero weights give uniform heads and loss V ln 2") {
  GacDomain dom(tiny_gac());
  const auto shape = PredictorShape::for_domain(dom);
  const auto p = PredictorParams::zeros(shape);
  const auto seqs = random_sequences(dom, 8, 1);
  const auto batch = make_batch(shape, seqs);
  CHECK(loss(p, batch) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
  std::vector<double> h(8, 0.0), lp(4);
  head_log_probs(p, h, lp);
  for (double v : lp) CHECK(v == doctest::Approx(std::log(0.5)));
}

TEST_CASE("head distributions are normalised") {
  GacDomain dom(tiny_gac());
  Rng rng(2);
  const auto p = PredictorParams::random(PredictorShape::for_domain(dom), rng, 2.0);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> h(8), lp(4);
    for (auto& x : h) x = rng.uniform(-1.0, 1.0);
    head_log_probs(p, h, lp);
    CHECK(std::exp(lp[0]) + std::exp(lp[1]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::exp(lp[2]) + std::exp(lp[3]) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("shape and layout") {
  GacDomain dom(tiny_gac());
  const auto shape = PredictorShape::for_domain(dom, 8);
  CHECK(shape.input_dim() == 3 + 2);
  CHECK(shape.null_action() == 2);
  // 3H x in + 3H x H + 3H + two heads of (2 x H + 2)
  CHECK(shape.param_count() == 24 * 5 + 24 * 8 + 24 + 2 * (16 + 2));
  const PredictorParams p(shape);
  CHECK(static_cast<std::size_t>(p.flat().size()) == shape.param_count());
  const auto enc = encode_step(shape, shape.null_action(), std::vector<Value>{1});
  CHECK(enc == std::vector<int>{2, 4});
}

TEST_CASE("backprop matches central finite differences") {
  GacDomain dom(tiny_gac());
  const auto shape = PredictorShape::for_domain(dom, 5);
  const auto seqs = random_sequences(dom, 4, 3);
  const auto batch = make_batch(shape, seqs);
  Rng rng(4);
  auto p = PredictorParams::random(shape, rng, 0.8);
  Eigen::VectorXd grad;
  loss_and_gradient(p, batch, grad);
  const double eps = 1e-6;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.flat().size(); ++i) {
    const double keep = p.flat()(i);
    p.flat()(i) = keep + eps;
    const double up = loss(p, batch);
    p.flat()(i) = keep - eps;
    const double down = loss(p, batch);
    p.flat()(i) = keep;
    const double fd = (up - down) / (2 * eps);
    worst = std::max(worst, std::abs(fd - grad(i)) / std::max(1e-3, std::abs(fd) + std::abs(grad(i))));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("masked positions contribute nothing") {
  GacDomain dom(tiny_gac());
  const auto shape = PredictorShape::for_domain(dom);
  const auto seqs = random_sequences(dom, 6, 5);
  auto batch = make_batch(shape, seqs);
  Rng rng(6);
  const auto p = PredictorParams::random(shape, rng);
  Eigen::VectorXd g1, g2;
  const double l1 = loss_and_gradient(p, batch, g1);
  int flipped = 0;
  for (int t = 0; t < batch.steps; ++t)
    for (int b = 0; b < batch.batch; ++b)
      if (batch.mask[static_cast<std::size_t>(t)](b) == 0.0) {
        for (int v = 0; v < 2; ++v) batch.targets[static_cast<std::size_t>(t)][static_cast<std::size_t>(b * 2 + v)] ^= 1;
        ++flipped;
      }
  REQUIRE(flipped > 0);
  const double l2 = loss_and_gradient(p, batch, g2);
  CHECK(l1 == l2);
  CHECK((g1 - g2).norm() == 0.0);
}

TEST_CASE("loss is a per-target mean: duplicating the batch changes nothing") {
  GacDomain dom(tiny_gac());
  const auto shape = PredictorShape::for_domain(dom);
  auto seqs = random_sequences(dom, 5, 7);
  Rng rng(8);
  const auto p = PredictorParams::random(shape, rng);
  Eigen::VectorXd g1, g2;
  const double l1 = loss_and_gradient(p, make_batch(shape, seqs), g1);
  auto doubled = seqs;
  doubled.insert(doubled.end(), seqs.begin(), seqs.end());
  const double l2 = loss_and_gradient(p, make_batch(shape, doubled), g2);
  CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));
  CHECK((g1 - g2).norm() < 1e-12);
}

TEST_CASE("batch layout places targets after the prefix") {
  GacDomain dom(tiny_gac());
  const auto shape = PredictorShape::for_domain(dom);
  Rng rng(9);
  const auto seq = random_sequence(dom, rng, 3, 3);
  const auto batch = make_batch(shape, std::span<const TrainingSequence>(&seq, 1));
  CHECK(batch.steps == static_cast<int>(seq.sequence_length()) - 1);
  CHECK(batch.target_count() == static_cast<double>(seq.steps.size()));
  for (int t = 0; t < batch.steps; ++t) {
    const bool target = t >= static_cast<int>(seq.masked_prefix());
    CHECK((batch.mask[static_cast<std::size_t>(t)](0) == 1.0) == target);
  }
}

TEST_CASE("adam closed forms") {
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  Eigen::VectorXd theta(3), g(3);
  theta << 1.0, -2.0, 0.5;
  g << 0.3, -4.0, 0.0;
  auto st = AdamState::fresh(3);
  adam_step(theta, g, st, cfg);
  CHECK(st.t == 1);
  // First step: m_hat = g, v_hat = g^2, so the move is lr * g / (|g| + eps).
  CHECK(theta(0) == doctest::Approx(1.0 - 0.1 * 0.3 / (0.3 + 1e-8)).epsilon(1e-12));
  CHECK(theta(1) == doctest::Approx(-2.0 + 0.1 * 4.0 / (4.0 + 1e-8)).epsilon(1e-12));
  CHECK(theta(2) == 0.5);
  // Second step with the same gradient keeps m_hat = g, v_hat = g^2.
  adam_step(theta, g, st, cfg);
  CHECK(theta(0) == doctest::Approx(1.0 - 0.2 * 0.3 / (0.3 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("training overfits a single sequence") {
  GacDomain dom(tiny_gac());
  Rng rng(10);
  ReplayBuffer buf;
  buf.add(random_sequence(dom, rng, 2, 4));
  TrainConfig cfg;
  cfg.batch_size = 1;
  cfg.adam.learning_rate = 0.02;
  auto learner = InfluenceLearner::untrained(PredictorShape::for_domain(dom), cfg, rng);
  const double before = dataset_loss(learner.params, buf);
  train_steps(learner, buf, 600, cfg, rng);
  const double after = dataset_loss(learner.params, buf);
  CHECK(after < 0.05 * before);
  CHECK(learner.adam.t == 600);
}

TEST_CASE("train_steps on an empty buffer is a no-op") {
  GacDomain dom(tiny_gac());
  Rng rng(1);
  TrainConfig cfg;
  auto learner = InfluenceLearner::untrained(PredictorShape::for_domain(dom), cfg, rng);
  const auto before = learner.params.flat();
  CHECK_FALSE(train_steps(learner, ReplayBuffer{}, 10, cfg, rng).has_value());
  CHECK(learner.params.flat() == before);
}

TEST_CASE("replay buffer and parameters round-trip through files") {
  GacDomain dom(tiny_gac());
  Rng rng(12);
  ReplayBuffer buf;
  for (int i = 0; i < 20; ++i) buf.add(random_sequence(dom, rng, 3, 4));
  const auto dir = std::filesystem::temp_directory_path() / "sis_unit_io";
  std::filesystem::create_directories(dir);
  buf.save(dir / "buf.jsonl");
  const auto loaded = ReplayBuffer::load(dir / "buf.jsonl");
  REQUIRE(loaded.size() == buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) CHECK(loaded[i] == buf[i]);

  const auto p = PredictorParams::random(PredictorShape::for_domain(dom), rng);
  save_params(p, dir / "theta.json");
  const auto q = load_params(dir / "theta.json");
  CHECK(q.shape() == p.shape());
  CHECK(q.flat() == p.flat());
  std::filesystem::remove_all(dir);
}
