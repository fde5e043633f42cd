#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "imknn/shapley.hpp"
#include "support.hpp"

using namespace imknn;

namespace {

/// Average marginal contribution over every ordering of the players.
template <typename Fn>
Eigen::VectorXd brute_force_shapley(int players, Fn value) {
  std::vector<int> order(static_cast<std::size_t>(players));
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(players);
  double count = 0.0;
  do {
    Coalition s = 0;
    for (const int i : order) {
      const double before = value(s);
      s |= Coalition{1} << i;
      x(i) += value(s) - before;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  return x / count;
}

std::vector<double> random_game(Rng& rng, int players) {
  std::vector<double> v(std::size_t{1} << players);
  for (auto& x : v) x = uniform01(rng);
  v[0] = 0.0;
  return v;
}

}  // namespace

TEST_SUITE("shapley") {

TEST_CASE("three-player game") {
  const std::vector<double> v = {0, 1, 2, 4, 3, 5, 6, 8};
  const auto x = exact_shapley(3, [&](Coalition s) { return v[s]; });
  CHECK(std::abs(x(0) - 5.0 / 3) < 1e-12);
  CHECK(std::abs(x(1) - 8.0 / 3) < 1e-12);
  CHECK(std::abs(x(2) - 11.0 / 3) < 1e-12);
}

TEST_CASE("kernel coefficients") {
  const auto coef = shapley_kernel(3);
  CHECK(coef[0] == doctest::Approx(1.0 / 3));
  CHECK(coef[1] == doctest::Approx(1.0 / 6));
  CHECK(coef[2] == doctest::Approx(1.0 / 3));
}

TEST_CASE("single player and additive games") {
  const auto one = exact_shapley(1, [](Coalition s) { return s ? 0.7 : 0.0; });
  CHECK(one(0) == doctest::Approx(0.7));

  const std::vector<double> v = {0.3, -1.2, 2.5, 0.1, 0.9};
  const auto additive = [&](Coalition s) {
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (s >> i & 1) total += v[i];
    return total;
  };
  const auto x = exact_shapley(5, additive);
  for (int i = 0; i < 5; ++i) CHECK(x(i) == doctest::Approx(v[static_cast<std::size_t>(i)]));
}

TEST_CASE("exact enumeration matches permutation brute force with efficiency") {
  Rng rng(99);
  for (int t = 0; t < 60; ++t) {
    const int k = 1 + static_cast<int>(uniform_index(rng, 8));
    const auto v = random_game(rng, k);
    const auto fn = [&](Coalition s) { return v[s]; };
    const auto x = exact_shapley(k, fn);
    const auto oracle = brute_force_shapley(k, fn);
    CHECK((x - oracle).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(x.sum() - (v.back() - v.front())) < 1e-9);
  }
}

TEST_CASE("symmetry and dummy players") {
  Rng rng(5);
  for (int t = 0; t < 40; ++t) {
    const int k = 3 + static_cast<int>(uniform_index(rng, 6));
    auto base = random_game(rng, k - 1);
    // Player k-1 is a dummy: adding it never changes the value.
    std::vector<double> v(std::size_t{1} << k);
    for (std::size_t s = 0; s < v.size(); ++s) v[s] = base[s & ((std::size_t{1} << (k - 1)) - 1)];
    const auto x = exact_shapley(k, [&](Coalition s) { return v[s]; });
    CHECK(std::abs(x(k - 1)) < 1e-9);

    // Players 0 and 1 are interchangeable in a game symmetric under swapping them.
    const auto swap01 = [](Coalition s) {
      const Coalition b0 = s & 1;
      const Coalition b1 = (s >> 1) & 1;
      return (s & ~Coalition{3}) | (b0 << 1) | b1;
    };
    std::vector<double> sym(v.size());
    for (std::size_t s = 0; s < v.size(); ++s) sym[s] = 0.5 * (v[s] + v[swap01(s)]);
    const auto y = exact_shapley(k, [&](Coalition s) { return sym[s]; });
    CHECK(std::abs(y(0) - y(1)) < 1e-9);
  }
}

TEST_CASE("Monte Carlo within 0.05 of exact at 20000 permutations") {
  Rng rng(123);
  const int k = 10;
  const auto v = random_game(rng, k);
  const auto fn = [&](Coalition s) { return v[s]; };
  const auto exact = exact_shapley(k, fn);
  MonteCarloOptions opts;
  opts.permutations = 20000;
  opts.seed = 77;
  const auto mc = monte_carlo_shapley(k, fn, opts);
  CHECK((mc - exact).cwiseAbs().maxCoeff() < 0.05);
  CHECK(std::abs(mc.sum() - v.back()) < 1e-9);
}

TEST_CASE("Monte Carlo is seeded and validates its options") {
  Rng rng(1);
  const auto v = random_game(rng, 6);
  const auto fn = [&](Coalition s) { return v[s]; };
  MonteCarloOptions opts;
  opts.seed = 4;
  CHECK(monte_carlo_shapley(6, fn, opts) == monte_carlo_shapley(6, fn, opts));
  opts.bias = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0);
  const auto biased = monte_carlo_shapley(6, fn, opts);
  CHECK(std::abs(biased.sum() - v.back()) < 1e-9);
  opts.bias = Eigen::VectorXd::Ones(5);
  CHECK_ERROR_CODE(monte_carlo_shapley(6, fn, opts), DimensionMismatch);
  opts.bias.reset();
  opts.permutations = 0;
  CHECK_ERROR_CODE(monte_carlo_shapley(6, fn, opts), InvalidParams);
  CHECK_ERROR_CODE(exact_shapley(0, fn), InvalidParams);
}

TEST_CASE("memoized game evaluates each coalition once") {
  int calls = 0;
  MemoizedGame game(4, [&](Coalition s) {
    ++calls;
    return static_cast<double>(std::popcount(s));
  });
  MonteCarloOptions opts;
  opts.permutations = 500;
  const auto x = monte_carlo_shapley(4, game, opts);
  CHECK(calls <= 16);
  for (int i = 0; i < 4; ++i) CHECK(x(i) == doctest::Approx(1.0));
}

}  // TEST_SUITE
