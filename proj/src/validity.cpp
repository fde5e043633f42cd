#include "imknn/validity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "imknn/error.hpp"
#include "imknn/random.hpp"

namespace imknn {

Partition::Partition(RowMatrix data_, std::vector<int> assignment_, int n_)
    : data(std::move(data_)), assignment(std::move(assignment_)), n(n_) {
  if (n < 2) throw Error(ErrorCode::InvalidParams, "a partition needs at least 2 clusters");
  if (assignment.size() != static_cast<std::size_t>(data.rows())) {
    throw Error(ErrorCode::LengthMismatch, "one cluster id per row");
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (const int id : assignment) {
    if (id < 0 || id >= n) throw Error(ErrorCode::LabelOutOfRange, "cluster id " + std::to_string(id));
    seen[static_cast<std::size_t>(id)] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorCode::InvalidParams, "every cluster needs at least one point");
  }
}

ClusterStats cluster_stats(const Partition& p) {
  const auto dim = p.data.cols();
  ClusterStats s;
  s.centers = RowMatrix::Zero(p.n, dim);
  s.variances = RowMatrix::Zero(p.n, dim);
  s.sizes.assign(static_cast<std::size_t>(p.n), 0);
  for (Eigen::Index i = 0; i < p.data.rows(); ++i) {
    const int c = p.assignment[static_cast<std::size_t>(i)];
    s.centers.row(c) += p.data.row(i);
    ++s.sizes[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < p.n; ++c) s.centers.row(c) /= static_cast<double>(s.sizes[static_cast<std::size_t>(c)]);
  for (Eigen::Index i = 0; i < p.data.rows(); ++i) {
    const int c = p.assignment[static_cast<std::size_t>(i)];
    s.variances.row(c) += (p.data.row(i) - s.centers.row(c)).array().square().matrix();
  }
  double norm_sum = 0.0;
  for (int c = 0; c < p.n; ++c) {
    s.variances.row(c) /= static_cast<double>(s.sizes[static_cast<std::size_t>(c)]);
    norm_sum += s.variances.row(c).norm();
  }
  const Eigen::RowVectorXd mean = p.data.colwise().mean();
  s.data_variance = ((p.data.rowwise() - mean).array().square().colwise().sum() /
                     static_cast<double>(p.data.rows()))
                        .transpose();
  s.stdev = std::sqrt(norm_sum) / p.n;
  return s;
}

double scatter(const Partition& p, const ClusterStats& s) {
  const double global = s.data_variance.norm();
  if (!(global > 0.0)) throw Error(ErrorCode::DegenerateData, "all points are identical");
  double total = 0.0;
  for (int c = 0; c < p.n; ++c) total += s.variances.row(c).norm();
  return total / (p.n * global);
}

double scatter(const Partition& p) { return scatter(p, cluster_stats(p)); }

double density(const Partition& p, const ClusterStats& s) {
  auto within = [&](Eigen::Index row, const Eigen::RowVectorXd& u) {
    return (p.data.row(row) - u).norm() <= s.stdev ? 1 : 0;
  };
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(p.n));
  for (Eigen::Index i = 0; i < p.data.rows(); ++i) members[static_cast<std::size_t>(p.assignment[static_cast<std::size_t>(i)])].push_back(i);

  std::vector<long> around_center(static_cast<std::size_t>(p.n), 0);
  for (int c = 0; c < p.n; ++c) {
    const Eigen::RowVectorXd center = s.centers.row(c);
    for (const auto i : members[static_cast<std::size_t>(c)]) around_center[static_cast<std::size_t>(c)] += within(i, center);
  }

  double total = 0.0;
  for (int i = 0; i < p.n; ++i) {
    for (int j = 0; j < p.n; ++j) {
      if (i == j) continue;
      const Eigen::RowVectorXd mid = 0.5 * (s.centers.row(i) + s.centers.row(j));
      long at_mid = 0;
      for (const auto r : members[static_cast<std::size_t>(i)]) at_mid += within(r, mid);
      for (const auto r : members[static_cast<std::size_t>(j)]) at_mid += within(r, mid);
      const long denom = std::max(around_center[static_cast<std::size_t>(i)], around_center[static_cast<std::size_t>(j)]);
      // 0/0 contributes nothing; an empty denominator otherwise counts as 1.
      if (at_mid == 0) continue;
      total += static_cast<double>(at_mid) / static_cast<double>(std::max<long>(denom, 1));
    }
  }
  return total / (static_cast<double>(p.n) * (p.n - 1));
}

double density(const Partition& p) { return density(p, cluster_stats(p)); }

double r_index(const Partition& p) {
  const auto stats = cluster_stats(p);
  return scatter(p, stats) + density(p, stats);
}

namespace {

KMeansResult lloyd(const RowMatrix& data, int k, Rng& rng, int max_iterations) {
  const Eigen::Index n = data.rows();
  RowMatrix centers(k, data.cols());

  // k-means++ seeding
  centers.row(0) = data.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n))));
  Eigen::VectorXd d2 = (data.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = uniform01(rng) * total;
      for (pick = 0; pick < n - 1; ++pick) {
        target -= d2(pick);
        if (target < 0.0) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n)));
    }
    centers.row(c) = data.row(pick);
    d2 = d2.cwiseMin((data.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd best_d2(n);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (data.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (data.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      best_d2(i) = best_d;
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }

    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (const int c : assign) ++counts[static_cast<std::size_t>(c)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] > 1 && best_d2(i) > far_d) {
          far_d = best_d2(i);
          far = i;
        }
      }
      --counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(far)])];
      assign[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      best_d2(far) = 0.0;
      changed = true;
    }

    centers.setZero();
    for (Eigen::Index i = 0; i < n; ++i) centers.row(assign[static_cast<std::size_t>(i)]) += data.row(i);
    for (int c = 0; c < k; ++c) centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    if (!changed) break;
  }

  KMeansResult out;
  out.assignment = std::move(assign);
  out.centers = centers;
  for (Eigen::Index i = 0; i < n; ++i) out.wcss += (data.row(i) - centers.row(out.assignment[static_cast<std::size_t>(i)])).squaredNorm();
  return out;
}

}  // namespace

KMeansResult kmeans(const RowMatrix& data, int n_clusters, int trials, std::uint64_t seed,
                    int max_iterations) {
  if (n_clusters < 1 || n_clusters > data.rows()) {
    throw Error(ErrorCode::InvalidParams, "cluster count must lie in 1..rows");
  }
  if (trials < 1) throw Error(ErrorCode::InvalidParams, "at least one k-means trial");
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    auto result = lloyd(data, n_clusters, rng, max_iterations);
    if (result.wcss < best.wcss) best = std::move(result);
  }
  return best;
}

Partitioner kmeans_partitioner(int trials) {
  return [trials](const RowMatrix& data, int n, std::uint64_t seed) {
    return kmeans(data, n, trials, seed).assignment;
  };
}

std::vector<int> nc_range_around(int true_n) {
  const int delta = std::max(1, static_cast<int>(std::lround(0.1 * true_n)));
  std::vector<int> out;
  for (int n = std::max(2, true_n - delta); n <= true_n + delta; ++n) out.push_back(n);
  return out;
}

SweepResult nc_sweep(const RowMatrix& data, const std::vector<int>& candidate_ns,
                     std::optional<int> true_n, std::uint64_t seed, int trials,
                     const Partitioner& partitioner) {
  if (candidate_ns.empty()) throw Error(ErrorCode::InvalidRange, "no candidate cluster counts");
  for (const int n : candidate_ns) {
    if (n < 2 || n >= data.rows()) {
      throw Error(ErrorCode::InvalidRange, "cluster count " + std::to_string(n) + " outside 2.." +
                                               std::to_string(data.rows() - 1));
    }
  }
  const Partitioner part = partitioner ? partitioner : kmeans_partitioner(trials);

  SweepResult out;
  out.true_n = true_n;
  double best_r = std::numeric_limits<double>::infinity();
  for (const int n : candidate_ns) {
    const Partition p(data, part(data, n, derive_seed(seed, static_cast<std::uint64_t>(n))), n);
    const auto stats = cluster_stats(p);
    SweepRow row{n, scatter(p, stats), density(p, stats), 0.0};
    row.r = row.t + row.f;
    if (row.r < best_r) {
      best_r = row.r;
      out.argmin_n = n;
    }
    out.rows.push_back(row);
  }
  out.min_at_true_n = true_n.has_value() && out.argmin_n == *true_n;
  return out;
}

void write_sweep_csv(const SweepResult& sweep, std::ostream& out) {
  const auto old_precision = out.precision(12);
  out << "n,T,F,R,flag\n";
  for (const auto& row : sweep.rows) {
    out << row.n << ',' << row.t << ',' << row.f << ',' << row.r << ',' << (row.n == sweep.argmin_n ? 1 : 0) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace imknn
