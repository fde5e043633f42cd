// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "imknn/benchmark.hpp"
#include "imknn/classifier.hpp"
#include "imknn/information.hpp"
#include "imknn/shapley.hpp"
#include "imknn/validity.hpp"
#include "imknn/wilcoxon.hpp"

using namespace imknn;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> body;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

std::string data(const std::string& file) { return std::string(IMKNN_DATA_DIR) + "/" + file; }

DatasetSpec csv_spec(const std::string& name, const std::string& file) {
  DatasetSpec d;
  d.name = name;
  d.path = data(file);
  return d;
}

NeighborSet random_set(Rng& rng, std::size_t k, int n_classes) {
  NeighborSet s;
  double d = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    d += 0.01 + uniform01(rng);
    s.entries.push_back({i, d, static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n_classes)))});
  }
  return s;
}

template <typename Fn>
Eigen::VectorXd permutation_shapley(int players, Fn value) {
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

Outcome weight_simplex() {
  Rng rng(1001);
  double worst_sum = 0.0;
  bool ok = true;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 2 + uniform_index(rng, 24);
    const auto w = compute_weights(random_set(rng, k, 3));
    worst_sum = std::max(worst_sum, std::abs(w.sum() - 1.0));
    ok = ok && w.minCoeff() >= 0.0;
    for (Eigen::Index i = 1; i < w.size(); ++i) ok = ok && w(i - 1) >= w(i);
  }
  NeighborSet three;
  for (std::size_t i = 0; i < 3; ++i) three.entries.push_back({i, static_cast<double>(i + 1), 0});
  const auto w3 = compute_weights(three);
  const double err3 = std::max({std::abs(w3(0) - 5.0 / 12), std::abs(w3(1) - 1.0 / 3), std::abs(w3(2) - 0.25)});
  ok = ok && worst_sum <= 1e-9 && err3 <= 1e-15;
  return {ok, fmt("max |sum-1| %.1e, K=3 error %.1e", worst_sum, err3)};
}

Outcome shapley_oracle() {
  Rng rng(2002);
  double worst_oracle = 0.0;
  double worst_eff = 0.0;
  double worst_sym = 0.0;
  double worst_dummy = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int k = 3 + static_cast<int>(uniform_index(rng, 6));
    const std::size_t n_sets = std::size_t{1} << k;
    std::vector<double> v(n_sets);
    for (std::size_t s = 1; s < n_sets; ++s) v[s] = uniform01(rng) * 4.0 - 1.0;
    // Make the last player a dummy and symmetrize players 0 and 1.
    const Coalition last = Coalition{1} << (k - 1);
    for (std::size_t s = 0; s < n_sets; ++s)
      if (s & last) v[s] = v[s & ~last];
    auto swap01 = [](std::size_t s) { return (s & ~std::size_t{3}) | ((s & 1) << 1) | ((s >> 1) & 1); };
    std::vector<double> sym(n_sets);
    for (std::size_t s = 0; s < n_sets; ++s) sym[s] = 0.5 * (v[s] + v[swap01(s)]);
    const auto fn = [&](Coalition s) { return sym[s]; };
    const auto x = exact_shapley(k, fn);
    worst_oracle = std::max(worst_oracle, (x - permutation_shapley(k, fn)).cwiseAbs().maxCoeff());
    worst_eff = std::max(worst_eff, std::abs(x.sum() - (sym.back() - sym.front())));
    worst_sym = std::max(worst_sym, std::abs(x(0) - x(1)));
    worst_dummy = std::max(worst_dummy, std::abs(x(k - 1)));
  }
  const std::vector<double> game = {0, 1, 2, 4, 3, 5, 6, 8};
  const auto three = exact_shapley(3, [&](Coalition s) { return game[s]; });
  const double err3 =
      std::max({std::abs(three(0) - 5.0 / 3), std::abs(three(1) - 8.0 / 3), std::abs(three(2) - 11.0 / 3)});

  std::vector<double> g10(std::size_t{1} << 10);
  for (std::size_t s = 1; s < g10.size(); ++s) g10[s] = uniform01(rng);
  const auto fn10 = [&](Coalition s) { return g10[s]; };
  MonteCarloOptions opts;
  opts.permutations = 20000;
  opts.seed = 10;
  const double mc_err = (monte_carlo_shapley(10, fn10, opts) - exact_shapley(10, fn10)).cwiseAbs().maxCoeff();

  const double prop = std::max({worst_oracle, worst_eff, worst_sym, worst_dummy});
  const bool ok = prop <= 1e-9 && err3 <= 1e-12 && mc_err <= 0.05;
  return {ok, fmt("properties %.1e, 3-player error %.1e, MC error %.4f", prop, err3, mc_err)};
}

Outcome information_suite() {
  Rng rng(3003);
  bool ok = true;
  double worst_asym = 0.0;
  for (int t = 0; t < 500; ++t) {
    Eigen::MatrixXd a(3, 5);
    Eigen::MatrixXd b(3, 5);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a(i) = uniform01(rng) < 0.4 ? 0.0 : uniform01(rng);
      b(i) = uniform01(rng) < 0.4 ? 0.0 : uniform01(rng);
    }
    const double ab = nmi(a, b, 8);
    const double ba = nmi(b, a, 8);
    ok = ok && ab >= 0.0 && ab <= 1.0;
    worst_asym = std::max(worst_asym, std::abs(ab - ba));
  }
  Eigen::Matrix2d counts;
  counts << 2, 1, 1, 2;
  const double mi = mutual_information(JointTable::from_counts(counts));
  const double zero = nmi(Eigen::MatrixXd::Constant(2, 3, 0.4), Eigen::MatrixXd::Identity(2, 3), 8);
  ok = ok && worst_asym <= 1e-12 && std::abs(mi - 0.081704) <= 1e-6 && zero == 0.0;
  return {ok, fmt("MI %.6f bits, max asymmetry %.1e, zero-entropy NMI %.1f", mi, worst_asym, zero)};
}

Outcome wilcoxon_suite() {
  const std::vector<double> d = {1, -2, 3, 4, 5};
  const std::vector<double> zeros(5, 0.0);
  const double p = wilcoxon_signed_rank(d, zeros).p_value;
  Rng rng(4004);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double shift = 0.8 * uniform01(rng);
    std::vector<double> a(25);
    std::vector<double> b(25);
    for (std::size_t i = 0; i < 25; ++i) {
      a[i] = shift + standard_normal(rng);
      b[i] = standard_normal(rng);
    }
    const double exact = wilcoxon_signed_rank(a, b, WilcoxonMethod::Exact).p_value;
    const double normal = wilcoxon_signed_rank(a, b, WilcoxonMethod::Normal).p_value;
    worst = std::max(worst, std::abs(exact - normal));
  }
  return {p == 0.1875 && worst <= 0.01, fmt("p = %.4f, max exact-vs-normal gap %.4f", p, worst)};
}

Outcome knn_band() {
  RunConfig c;
  c.datasets = {csv_spec("iris", "iris.csv")};
  c.methods = {"knn"};
  c.runs = 1000;
  c.k = 5;
  const auto report = run_benchmark(c);
  const double acc = 100.0 * report.find("knn", "iris")->accuracy_summary.mean;
  return {std::abs(acc - 95.83) <= 3.0, fmt("Iris KNN K=5 mean accuracy %.2f%% (target 95.83 +/- 3)", acc)};
}

Outcome imknn_direction() {
  RunConfig c;
  c.datasets = {csv_spec("iris", "iris.csv"), csv_spec("wine", "wine.csv")};
  c.methods = {"knn", "imknn"};
  c.runs = 1000;
  c.k.reset();
  c.alpha.reset();
  const auto report = run_benchmark(c);
  bool ok = true;
  std::ostringstream detail;
  for (const auto& name : report.dataset_names) {
    if (detail.tellp() > 0) detail << "; ";
    const auto* knn = report.find("knn", name);
    const auto* imknn = report.find("imknn", name);
    const double gap = 100.0 * (imknn->accuracy_summary.mean - knn->accuracy_summary.mean);
    const double p = imknn->p_accuracy.value_or(1.0);
    const bool here = gap >= 0.0 && (gap <= 2.0 || p < 0.01);
    ok = ok && here;
    detail << name << fmt(": IMKNN %.2f%% vs KNN %.2f%% (gap %+.2f", 100.0 * imknn->accuracy_summary.mean,
                          100.0 * knn->accuracy_summary.mean, gap)
           << fmt(", p %.3g)", p);
  }
  return {ok, detail.str()};
}

Outcome blend_collapse() {
  Rng rng(7007);
  const int n = 300;
  RowMatrix x(n, 4);
  Dataset train;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 4; ++j) x(i, j) = standard_normal(rng);
  train.features = x;
  for (int i = 0; i < n; ++i) train.labels.push_back(static_cast<int>(uniform_index(rng, 3)));
  train.class_names = {"a", "b", "c"};
  ImknnModel model;
  model.index = fit_index(train);
  model.alpha = 1.0;
  int agree = 0;
  for (int q = 0; q < 500; ++q) {
    model.k = 1 + uniform_index(rng, 15);
    Eigen::VectorXd p(4);
    for (int j = 0; j < 4; ++j) p(j) = standard_normal(rng);
    // Standalone voter: rank all rows by distance and weight them directly.
    std::vector<std::pair<double, int>> dist;
    for (int i = 0; i < n; ++i) dist.push_back({(x.row(i).transpose() - p).squaredNorm(), i});
    std::sort(dist.begin(), dist.end());
    const std::size_t k = model.k;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += std::sqrt(dist[i].first);
    Eigen::Vector3d score = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < k; ++i) {
      const double w = k == 1 ? 1.0 : total == 0.0 ? 1.0 / k : (1.0 - std::sqrt(dist[i].first) / total) / (k - 1.0);
      score(train.labels[static_cast<std::size_t>(dist[i].second)]) += w;
    }
    int best = 0;
    const double top = score.maxCoeff();
    // Tied classes go to the class of the nearest neighbor among them.
    for (std::size_t i = 0; i < k; ++i) {
      const int label = train.labels[static_cast<std::size_t>(dist[i].second)];
      if (score(label) >= top - 1e-12) {
        best = label;
        break;
      }
    }
    agree += predict_one(model, p, static_cast<std::uint64_t>(q)).label == best;
  }
  return {agree == 500, fmt("%.0f / 500 queries agree", agree)};
}

Outcome validity_sweep() {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto [d, truth] = synth_blobs(3, 50, 2, 8.0, 1.0, seed);
    hits += nc_sweep(d.features, {2, 3, 4, 5, 6}, 3, seed).argmin_n == 3;
  }
  RowMatrix x(4, 1);
  x << 0, 1, 10, 11;
  const double r = r_index(Partition(x, {0, 0, 1, 1}, 2));
  return {hits >= 95 && std::abs(r - 0.009901) <= 1e-6,
          fmt("argmin at 3 in %.0f / 100 seeds, hand example R %.6f", hits, r)};
}

Outcome determinism() {
  RunConfig c;
  c.datasets = {csv_spec("iris", "iris.csv")};
  c.methods = {"knn", "weighted", "fuzzy", "mknn", "ensemble", "imknn"};
  c.runs = 5;
  c.base_seed = 9;
  c.k.reset();
  c.alpha.reset();
  std::ostringstream a;
  std::ostringstream b;
  write_report_csv(run_benchmark(c), a);
  write_report_csv(run_benchmark(c), b);
  return {a.str() == b.str() && !a.str().empty(), fmt("%.0f CSV bytes, identical", static_cast<double>(a.str().size()))};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "weight simplex", 1.0, weight_simplex},
      {2, "Shapley oracle", 30.0, shapley_oracle},
      {3, "information measures", 1.0, information_suite},
      {4, "Wilcoxon signed-rank", 5.0, wilcoxon_suite},
      {5, "traditional KNN band on Iris", 30.0, knn_band},
      {6, "IMKNN not below KNN on Iris and Wine", 300.0, imknn_direction},
      {7, "alpha = 1 blend collapse", 10.0, blend_collapse},
      {8, "validity sweep at the true cluster count", 60.0, validity_sweep},
      {9, "benchmark report determinism", 5.0, determinism},
  };
  int failed = 0;
  const auto suite_start = Clock::now();
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool ok = o.ok && in_time;
    failed += !ok;
    std::printf("[%s] %d %s: %s; %.2f s (budget %.0f s)\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs, c.budget_seconds);
    std::fflush(stdout);
  }
  const double total = std::chrono::duration<double>(Clock::now() - suite_start).count();
  const bool whole = total < 600.0;
  failed += !whole;
  std::printf("[%s] 10 whole suite under 10 minutes: %.1f s\n", whole ? "PASS" : "FAIL", total);
  return failed == 0 ? 0 : 1;
}
