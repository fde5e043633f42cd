#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "imknn/neighbors.hpp"

namespace imknn {

// Reference KNN variants. Each comes as a vote over an already retrieved
// NeighborSet plus a predictor over a fitted index.

enum class Variant { Traditional, Weighted, Fuzzy, Mknn, Ensemble };

Variant parse_variant(std::string_view id);
std::string_view to_string(Variant v);

struct VariantConfig {
  Variant variant = Variant::Traditional;
  std::size_t k = 5;
  double fuzzy_m = 2.0;
  std::size_t mknn_h = 0;  // 0: use k
};

/// Unweighted vote; ties go to the nearest tied class.
int majority_vote(const NeighborSet& neighbors, int n_classes);
int knn_predict(const NeighborIndex& index, const Eigen::Ref<const Eigen::VectorXd>& point,
                std::size_t k);

/// Gaussian kernel exp(-d^2 / (2 h^2)) with h the median neighbor distance
/// (1 when that median is 0).
Eigen::VectorXd kernel_weights(const NeighborSet& neighbors);
int kernel_vote(const NeighborSet& neighbors, int n_classes);
int weighted_knn_predict(const NeighborIndex& index, const Eigen::Ref<const Eigen::VectorXd>& point,
                         std::size_t k);

struct FuzzyResult {
  int label = 0;
  Eigen::VectorXd membership;
};

/// Crisp-neighbor fuzzy memberships with inverse-distance exponent 2/(m-1).
/// A neighbor at distance 0 takes full membership.
FuzzyResult fuzzy_memberships(const NeighborSet& neighbors, int n_classes, double m = 2.0);
FuzzyResult fuzzy_knn_predict(const NeighborIndex& index, const Eigen::Ref<const Eigen::VectorXd>& point,
                              std::size_t k, double m = 2.0);

/// MKNN: each training row's validity is the share of its H nearest other
/// training rows with the same label, computed once at fit.
class MknnModel {
 public:
  MknnModel() = default;
  MknnModel(NeighborIndex index, std::size_t h);

  const NeighborIndex& index() const { return index_; }
  const std::vector<double>& validity() const { return validity_; }
  std::size_t h() const { return h_; }

  int predict(const Eigen::Ref<const Eigen::VectorXd>& point, std::size_t k) const;

 private:
  NeighborIndex index_;
  std::vector<double> validity_;
  std::size_t h_ = 0;
};

/// Score per neighbor: validity * 1 / (d + 0.5).
int mknn_vote(const NeighborSet& neighbors, const std::vector<double>& validity, int n_classes);

/// Largest K of the ensemble: floor(sqrt(n)), at least 1.
std::size_t ensemble_k_max(std::size_t train_size);
/// Rank weight 1 / log2(r + 1) for 1-based rank r.
double ensemble_rank_weight(std::size_t rank);
int ensemble_vote(const NeighborSet& neighbors, int n_classes);
int ensemble_knn_predict(const NeighborIndex& index, const Eigen::Ref<const Eigen::VectorXd>& point);

}  // namespace imknn
