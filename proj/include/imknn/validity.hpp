#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Core>

#include "imknn/dataset.hpp"

namespace imknn {

/// Hard assignment of every row of `data` to one of n >= 2 clusters.
struct Partition {
  RowMatrix data;
  std::vector<int> assignment;
  int n = 0;

  Partition() = default;
  Partition(RowMatrix data, std::vector<int> assignment, int n);
};

struct ClusterStats {
  RowMatrix centers;        // n x dim
  RowMatrix variances;      // n x dim, population
  std::vector<std::size_t> sizes;
  Eigen::VectorXd data_variance;
  /// (1/n) * sqrt(sum_i ||variance_i||)
  double stdev = 0.0;
};

ClusterStats cluster_stats(const Partition& partition);

/// Mean over clusters of ||var(cluster)|| / ||var(data)||.
double scatter(const Partition& partition);
double scatter(const Partition& partition, const ClusterStats& stats);

/// Average over ordered cluster pairs of the point count within `stdev` of
/// the pair midpoint, relative to the larger of the counts around each center.
double density(const Partition& partition);
double density(const Partition& partition, const ClusterStats& stats);

/// R = scatter + density; lower is better.
double r_index(const Partition& partition);

struct KMeansResult {
  std::vector<int> assignment;
  RowMatrix centers;
  double wcss = 0.0;
};

/// k-means++ seeding plus Lloyd iterations; best of `trials` by WCSS.
/// Empty clusters are refilled from the point farthest from its center.
KMeansResult kmeans(const RowMatrix& data, int n_clusters, int trials, std::uint64_t seed,
                    int max_iterations = 100);

using Partitioner = std::function<std::vector<int>(const RowMatrix& data, int n, std::uint64_t seed)>;

/// The centroid partitioner used by sweeps by default.
Partitioner kmeans_partitioner(int trials);

struct SweepRow {
  int n = 0;
  double t = 0.0;
  double f = 0.0;
  double r = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int argmin_n = 0;
  std::optional<int> true_n;
  /// True iff the smallest R sits at the known true cluster count.
  bool min_at_true_n = false;
};

/// Candidates with n >= 2 and n < row count. Empty or malformed lists throw
/// InvalidRange.
SweepResult nc_sweep(const RowMatrix& data, const std::vector<int>& candidate_ns,
                     std::optional<int> true_n, std::uint64_t seed, int trials = 10,
                     const Partitioner& partitioner = {});

/// Candidate counts covering true_n +/- 10% (at least +/- 1), clipped at 2.
std::vector<int> nc_range_around(int true_n);

/// CSV with header n,T,F,R,flag; flag marks the argmin row.
void write_sweep_csv(const SweepResult& sweep, std::ostream& out);

}  // namespace imknn
