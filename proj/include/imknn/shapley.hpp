#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "imknn/error.hpp"
#include "imknn/random.hpp"

namespace imknn {

/// Coalitions are bitmasks over players 0..n-1.
using Coalition = std::uint64_t;

inline constexpr int kMaxExactPlayers = 24;

/// Caches a characteristic function. Dense storage up to 20 players.
template <typename Fn>
class MemoizedGame {
 public:
  MemoizedGame(int players, Fn fn) : players_(players), fn_(std::move(fn)) {
    if (players_ <= 20) dense_.assign(std::size_t{1} << players_, kUnset);
  }

  double operator()(Coalition s) {
    if (!dense_.empty()) {
      double& slot = dense_[static_cast<std::size_t>(s)];
      if (std::isnan(slot)) slot = fn_(s);
      return slot;
    }
    auto it = sparse_.find(s);
    if (it == sparse_.end()) it = sparse_.emplace(s, fn_(s)).first;
    return it->second;
  }

 private:
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
  int players_;
  Fn fn_;
  std::vector<double> dense_;
  std::unordered_map<Coalition, double> sparse_;
};

/// Shapley kernel |S|!(n-|S|-1)!/n! indexed by |S|.
inline std::vector<double> shapley_kernel(int players) {
  std::vector<double> coef(static_cast<std::size_t>(players));
  coef[0] = 1.0 / players;
  for (int s = 1; s < players; ++s) {
    coef[static_cast<std::size_t>(s)] = coef[static_cast<std::size_t>(s - 1)] * s / (players - s);
  }
  return coef;
}

/// Exact Shapley values by subset enumeration:
///   X_i = sum_{S not containing i} kernel(|S|) (v(S + i) - v(S)).
template <typename Fn>
Eigen::VectorXd exact_shapley(int players, Fn&& value) {
  if (players < 1 || players > kMaxExactPlayers) {
    throw Error(ErrorCode::InvalidParams, "exact Shapley supports 1.." +
                                              std::to_string(kMaxExactPlayers) + " players");
  }
  const std::size_t n_sets = std::size_t{1} << players;
  std::vector<double> v(n_sets);
  for (std::size_t s = 0; s < n_sets; ++s) v[s] = value(static_cast<Coalition>(s));

  const auto coef = shapley_kernel(players);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(players);
  for (std::size_t s = 0; s < n_sets; ++s) {
    const auto size = static_cast<std::size_t>(std::popcount(s));
    if (size == coef.size()) continue;
    const double w = coef[size];
    for (int i = 0; i < players; ++i) {
      const std::size_t bit = std::size_t{1} << i;
      if (s & bit) continue;
      x(i) += w * (v[s | bit] - v[s]);
    }
  }
  return x;
}

struct MonteCarloOptions {
  int permutations = 2000;
  std::uint64_t seed = 0;
  /// When set, orderings are drawn without replacement with probability
  /// proportional to these weights instead of uniformly.
  std::optional<Eigen::VectorXd> bias;
};

/// Average marginal contribution over sampled orderings. Every ordering
/// telescopes to v(N) - v(empty), so the estimate is efficient exactly.
template <typename Fn>
Eigen::VectorXd monte_carlo_shapley(int players, Fn&& value, const MonteCarloOptions& opts) {
  if (players < 1 || players > 63) throw Error(ErrorCode::InvalidParams, "1..63 players");
  if (opts.permutations < 1) {
    throw Error(ErrorCode::InvalidParams, "Monte Carlo Shapley needs at least 1 permutation");
  }
  if (opts.bias && opts.bias->size() != players) {
    throw Error(ErrorCode::DimensionMismatch, "bias weights must have one entry per player");
  }
  Rng rng(opts.seed);
  std::vector<int> order(static_cast<std::size_t>(players));
  std::vector<std::pair<double, int>> keys(order.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(players);
  const double empty = value(Coalition{0});

  for (int p = 0; p < opts.permutations; ++p) {
    if (opts.bias) {
      // Efraimidis-Spirakis: ascending exponential keys -log(u)/w.
      for (int i = 0; i < players; ++i) {
        const double w = std::max((*opts.bias)(i), 1e-12);
        double u = uniform01(rng);
        while (u <= 0.0) u = uniform01(rng);
        keys[static_cast<std::size_t>(i)] = {-std::log(u) / w, i};
      }
      std::sort(keys.begin(), keys.end());
      for (std::size_t i = 0; i < keys.size(); ++i) order[i] = keys[i].second;
    } else {
      std::iota(order.begin(), order.end(), 0);
      shuffle(order, rng);
    }
    Coalition s = 0;
    double before = empty;
    for (const int i : order) {
      s |= Coalition{1} << i;
      const double after = value(s);
      x(i) += after - before;
      before = after;
    }
  }
  return x / static_cast<double>(opts.permutations);
}

}  // namespace imknn
