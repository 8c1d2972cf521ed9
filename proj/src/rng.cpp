// SPDX-License-Identifier: Apache-2.0
#include "sis/rng.hpp"

#include <stdexcept>

namespace sis {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t master_seed, std::uint64_t stream_id) {
  // Counter-based derivation: mix (master, stream) through splitmix64 and
  // feed four words into seed_seq, whose algorithm is fixed by the standard.
  std::uint64_t state = master_seed;
  const std::uint64_t a = splitmix64(state);
  state ^= stream_id * 0xd1b54a32d192ed03ULL;
  const std::uint64_t b = splitmix64(state);
  const std::uint64_t c = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
  seed_ = c;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: empty range");
  std::uint64_t x = engine_();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = engine_();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  // Rounding can leave u marginally above the last bucket.
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return i;
  throw std::invalid_argument("Rng::categorical: all weights are zero");
}

Rng derive_rng(std::uint64_t master_seed, std::uint64_t run_id) { return Rng(master_seed, run_id); }

}  // namespace sis
