#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "lge/adam.hpp"
#include "lge/prng.hpp"
#include "lge/stats.hpp"
#include "oracles.hpp"

using namespace lge;

TEST_CASE("prng_uniform stays in [lo, hi) and rejects empty intervals") {
  PrngStream s(42, 7);
  for (int i = 0; i < 10000; ++i) {
    const double v = prng_uniform(s, 0.0, 1.0);
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
  CHECK_THROWS_AS(prng_uniform(s, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(prng_uniform(s, 2.0, 1.0), InvalidArgument);
}

TEST_CASE("equal (seed, stream) pairs give equal sequences") {
  PrngStream a(123, 9), b(123, 9), c(123, 10), d(124, 9);
  bool differs_stream = false, differs_seed = false;
  for (int i = 0; i < 10000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs_stream |= x != c.next_u64();
    differs_seed |= x != d.next_u64();
  }
  CHECK(differs_stream);
  CHECK(differs_seed);
}

TEST_CASE("uniform sample mean converges to 0.5") {
  PrngStream s(2024, 1);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += prng_uniform(s, 0.0, 1.0);
  CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("normal variates have unit moments") {
  PrngStream s(5, 5);
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("below covers its range without bias") {
  PrngStream s(3, 3);
  std::array<int, 7> hist{};
  for (int i = 0; i < 70000; ++i) ++hist[s.below(7)];
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
}

namespace {

std::vector<Grid> single(double v) {
  std::vector<Grid> g;
  g.emplace_back(1, 1, 1, v);
  return g;
}

}  // namespace

TEST_CASE("first Adam step from zero matches the closed form") {
  auto theta = single(0.0);
  const auto grad = single(1.0);
  AdamState st = AdamState::for_params(theta, 1e-4, 0.0);
  adam_step(theta, grad, st);
  // m_hat = v_hat = 1, so the step is lr / (1 + eps).
  const double expected = -9.9999999e-5;
  CHECK(std::abs(theta[0][0] - expected) / std::abs(expected) < 1e-9);
  CHECK(st.step == 1);
}

TEST_CASE("zero gradient with zero moments is a fixed point") {
  std::vector<Grid> theta;
  theta.emplace_back(2, 3, 4, 0.7);
  const auto before = theta;
  std::vector<Grid> grad;
  grad.emplace_back(2, 3, 4, 0.0);
  AdamState st = AdamState::for_params(theta, 1e-3, 0.0);
  for (int i = 0; i < 5; ++i) adam_step(theta, grad, st);
  CHECK(theta == before);
  CHECK(st.step == 5);
}

TEST_CASE("two unit-gradient steps match the scalar recurrence") {
  auto theta = single(0.0);
  const auto grad = single(1.0);
  AdamState st = AdamState::for_params(theta, 1e-4, 0.0);
  oracle::ScalarAdam ref;
  double x = 0.0;
  for (int i = 0; i < 2; ++i) {
    adam_step(theta, grad, st);
    x = ref.step(x, 1.0, 1e-4, 0.9, 0.999, 1e-8, 0.0);
  }
  CHECK(std::abs(theta[0][0] - x) < 1e-12);
}

TEST_CASE("adam_step agrees with the scalar oracle on random inputs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Grid> theta;
    theta.emplace_back(2, 2, 3);
    theta.emplace_back(1, 1, 4);
    for (auto& t : theta) {
      for (double& v : t.values) v = u(rng);
    }
    const double lr = 1e-3 * (1.0 + u(rng));
    const double decay = trial % 2 == 0 ? 1e-9 : 0.5;  // large decay exercises the path
    AdamState st = AdamState::for_params(theta, lr, decay);
    const std::array<bool, 2> mask{true, false};

    std::vector<oracle::ScalarAdam> ref(16);
    std::vector<double> flat;
    for (const auto& t : theta) flat.insert(flat.end(), t.values.begin(), t.values.end());

    for (int step = 0; step < 3; ++step) {
      std::vector<Grid> grads = theta;
      for (auto& g : grads) {
        for (double& v : g.values) v = u(rng);
      }
      adam_step(theta, grads, st, mask);
      std::size_t k = 0;
      for (std::size_t ti = 0; ti < grads.size(); ++ti) {
        for (double g : grads[ti].values) {
          flat[k] = ref[k].step(flat[k], g, lr, 0.9, 0.999, 1e-8, mask[ti] ? decay : 0.0);
          ++k;
        }
      }
    }
    std::size_t k = 0;
    for (const auto& t : theta) {
      for (double v : t.values) CHECK(std::abs(v - flat[k++]) < 1e-12);
      CHECK(all_finite(t));
    }
  }
}

TEST_CASE("adam_step rejects mismatched shapes") {
  auto theta = single(0.0);
  std::vector<Grid> grads;
  grads.emplace_back(1, 1, 2);
  AdamState st = AdamState::for_params(theta, 1e-4, 0.0);
  CHECK_THROWS_AS(adam_step(theta, grads, st), InvalidArgument);
  std::vector<Grid> none;
  CHECK_THROWS_AS(adam_step(theta, none, st), InvalidArgument);
  CHECK(st.step == 0);
}

TEST_CASE("percentile_nearest_rank") {
  std::vector<double> v(10);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(percentile_nearest_rank(v, 90) == 9.0);
  CHECK(percentile_nearest_rank(v, 100) == 10.0);
  CHECK(percentile_nearest_rank(v, 10) == 1.0);
  CHECK(percentile_nearest_rank(v, 0.5) == 1.0);
  CHECK(percentile_nearest_rank(std::vector<double>{4.2}, 37) == 4.2);
  CHECK_THROWS_AS(percentile_nearest_rank(std::vector<double>{}, 50), InvalidArgument);
  CHECK_THROWS_AS(percentile_nearest_rank(v, 0), InvalidArgument);
  CHECK_THROWS_AS(percentile_nearest_rank(v, 101), InvalidArgument);
}

TEST_CASE("percentile is permutation invariant and returns a member") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng() % 40);
    for (double& x : v) x = u(rng);
    const double p = 1.0 + static_cast<double>(rng() % 100);
    const double a = percentile_nearest_rank(v, p);
    std::shuffle(v.begin(), v.end(), rng);
    CHECK(percentile_nearest_rank(v, p) == a);
    CHECK(std::find(v.begin(), v.end(), a) != v.end());
  }
}

TEST_CASE("median and sample sd") {
  CHECK(median(std::vector<double>{3, 1, 2}) == 2.0);
  CHECK(median(std::vector<double>{4, 1, 3, 2}) == 2.5);
  CHECK(sample_sd(std::vector<double>{0, 2}) == doctest::Approx(std::sqrt(2.0)));
}
