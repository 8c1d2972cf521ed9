#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "sis/model.hpp"
#include "sis/rng.hpp"

using namespace sis;

TEST_CASE("same seed gives the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
}

TEST_CASE("derive_rng: same (seed, run) identical, distinct runs differ in the first 64 draws") {
  Rng a = derive_rng(7, 3), b = derive_rng(7, 3);
  for (int i = 0; i < 64; ++i) CHECK(a() == b());
  std::set<std::uint64_t> firsts;
  for (std::uint64_t run = 0; run < 50; ++run) {
    Rng r = derive_rng(7, run), base = derive_rng(7, run + 1);
    bool differ = false;
    for (int i = 0; i < 64; ++i) differ |= r() != base();
    CHECK(differ);
    firsts.insert(derive_rng(7, run)());
  }
  CHECK(firsts.size() == 50);
}

TEST_CASE("below stays in range and covers it") {
  Rng r(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = r.below(7);
    REQUIRE(v < 7);
    ++hits[v];
  }
  for (int h : hits) CHECK(h > 800);
}

TEST_CASE("uniform in [0, 1) and categorical frequencies") {
  Rng r(2);
  double w[3] = {1.0, 2.0, 1.0};
  int c[3] = {0, 0, 0};
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    ++c[r.categorical(w)];
  }
  CHECK(std::abs(c[1] / double(n) - 0.5) < 0.015);
}

TEST_CASE("entropy helpers in nats") {
  CHECK(binary_entropy(0.5) == doctest::Approx(std::log(2.0)));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.2) + binary_entropy(0.5) == doctest::Approx(1.1935).epsilon(1e-4));
}

TEST_CASE("LocalHistory append and prefix") {
  LocalHistory d(LocalState{{1, 0}});
  CHECK(d.length() == 1);
  CHECK(d.num_steps() == 0);
  const LocalHistory e = append_history(d, 1, LocalState{{0, 1}});
  CHECK(d.num_steps() == 0);  // input untouched
  CHECK(e.num_steps() == 1);
  CHECK(e.initial_local() == LocalState{{1, 0}});
  CHECK(e.local_state(1) == LocalState{{0, 1}});
  CHECK(e.action(0) == 1);
  CHECK(e.prefix(0) == d);
  CHECK_THROWS(e.prefix(2));
  CHECK_THROWS(LocalHistory(d).extend(0, std::vector<Value>{1}));
}
