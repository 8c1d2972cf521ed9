// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace sis {

/// Seedable random stream passed explicitly into every stochastic operation.
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the standard.
/// All derived variates are computed from raw engine words (no
/// implementation-defined std distributions), so a given seed produces the
/// same draws on every conforming toolchain.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}
  Rng(std::uint64_t master_seed, std::uint64_t stream_id);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n). Unbiased (Lemire's multiply-shift rejection).
  std::uint64_t below(std::uint64_t n);

  /// Index drawn from an unnormalised discrete distribution.
  std::size_t categorical(std::span<const double> weights);

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Independent child stream; deterministic in (this stream's seed, tag).
  Rng split(std::uint64_t tag) const { return Rng(seed_, tag); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_ = 0;
};

/// Per-run stream for experiments: distinct run ids give unrelated streams.
Rng derive_rng(std::uint64_t master_seed, std::uint64_t run_id);

}  // namespace sis
