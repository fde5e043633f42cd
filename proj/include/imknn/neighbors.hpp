#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "imknn/dataset.hpp"
#include "imknn/error.hpp"

namespace imknn {

/// Squared Euclidean distance. Both search paths use this so that their
/// distances agree bit for bit.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar squared_euclidean(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  Scalar acc(0);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const Scalar d = a(i) - b(i);
    acc += d * d;
  }
  return acc;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar euclidean(const Eigen::MatrixBase<DerivedA>& a,
                                    const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "vectors of length " + std::to_string(a.size()) +
                                                  " and " + std::to_string(b.size()));
  }
  using std::sqrt;
  return sqrt(squared_euclidean(a, b));
}

enum class Metric { Euclidean };

Metric parse_metric(std::string_view id);
std::string_view to_string(Metric metric);

struct Neighbor {
  std::size_t train_index = 0;
  double distance = 0.0;
  int label = 0;
};

/// Neighbors of one query, ascending by (distance, train_index).
struct NeighborSet {
  std::vector<Neighbor> entries;
  std::optional<std::size_t> query_id;

  std::size_t size() const { return entries.size(); }
  const Neighbor& operator[](std::size_t i) const { return entries[i]; }
  /// The first k entries.
  NeighborSet prefix(std::size_t k) const;
};

enum class SearchPath { Auto, BruteForce, KdTree };

/// Immutable index over standardized training rows.
class NeighborIndex {
 public:
  NeighborIndex();
  NeighborIndex(const NeighborIndex&);
  NeighborIndex& operator=(const NeighborIndex&);
  NeighborIndex(NeighborIndex&&) noexcept;
  NeighborIndex& operator=(NeighborIndex&&) noexcept;
  ~NeighborIndex();

  bool fitted() const { return fitted_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  int n_classes() const { return n_classes_; }
  Metric metric() const { return metric_; }
  const RowMatrix& points() const { return points_; }
  const std::vector<int>& labels() const { return labels_; }

  /// The k nearest rows (k clamped to size()); ties go to the smaller index.
  NeighborSet query(const Eigen::Ref<const Eigen::VectorXd>& point, std::size_t k,
                    SearchPath path = SearchPath::Auto) const;

  friend NeighborIndex fit_index(const Dataset& train, Metric metric);

 private:
  struct KdTree;

  void require_fitted() const;

  RowMatrix points_;
  std::vector<int> labels_;
  int n_classes_ = 0;
  Metric metric_ = Metric::Euclidean;
  bool fitted_ = false;
  std::unique_ptr<KdTree> tree_;
};

NeighborIndex fit_index(const Dataset& train, Metric metric = Metric::Euclidean);
NeighborIndex fit_index(const Dataset& train, std::string_view metric_id);

/// Class with the largest score; ties go to the class of the nearest
/// neighbor among the tied classes, then to the smallest class id.
int argmax_nearest_tiebreak(const Eigen::Ref<const Eigen::VectorXd>& scores,
                            const NeighborSet& neighbors, double tolerance = 1e-12);

}  // namespace imknn
