#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "fedforest/random.hpp"

using namespace fedforest;

TEST_CASE("splitmix64 matches the reference sequence") {
  // Reference: Vigna's splitmix64.c seeded with 0; each output advances the
  // state by the golden gamma.
  std::uint64_t state = 0;
  auto next = [&] {
    const auto out = splitmix64(state);
    state += 0x9e3779b97f4a7c15ULL;
    return out;
  };
  CHECK(next() == 0xe220a8397b1dcdafULL);
  CHECK(next() == 0x6e789e6aa1b965f4ULL);
  CHECK(next() == 0x06c45d188009454fULL);
}

TEST_CASE("fnv1a of known strings") {
  CHECK(hash_string("") == 0xcbf29ce484222325ULL);
  CHECK(hash_string("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hash_string("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("derive_seed separates key sequences") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b) seen.insert(derive_seed(7, {a, b}));
  CHECK(seen.size() == 400);
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
  CHECK(derive_seed(1, {}) != derive_seed(1, {0}));
}

TEST_CASE("mt19937_64 stream is the standard one") {
  // 10000th output for the default seed is fixed by the C++ standard.
  std::mt19937_64 ref(5489u);
  ref.discard(9999);
  CHECK(ref() == 9981545732273789042ULL);
  Rng rng(5489u);
  for (int i = 0; i < 9999; ++i) rng.next();
  CHECK(rng.next() == 9981545732273789042ULL);
}

TEST_CASE("uniform_index stays in range and covers it") {
  Rng rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto k = rng.uniform_index(7);
    REQUIRE(k < 7);
    ++hits[k];
  }
  for (int h : hits) CHECK(h > 850);
  CHECK(rng.uniform_index(1) == 0);
}

TEST_CASE("uniform01 and normal moments") {
  Rng rng(11);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(s / n == doctest::Approx(0.0).epsilon(0.01).scale(1.0));
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("shuffle is a permutation and partial_shuffle samples without replacement") {
  Rng rng(5);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(std::span<int>(v));
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);

  std::vector<int> first_counts(10, 0);
  for (int rep = 0; rep < 5000; ++rep) {
    std::vector<int> w(10);
    std::iota(w.begin(), w.end(), 0);
    rng.partial_shuffle(std::span<int>(w), 3);
    std::set<int> head(w.begin(), w.begin() + 3);
    REQUIRE(head.size() == 3);
    for (int x : head) ++first_counts[static_cast<std::size_t>(x)];
  }
  // Each element lands in the sample with probability 3/10.
  for (int c : first_counts) CHECK(c == doctest::Approx(1500).epsilon(0.1));
}

TEST_CASE("Rng is reproducible") {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}
