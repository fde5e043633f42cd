#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "imknn/dataset.hpp"
#include "imknn/neighbors.hpp"
#include "imknn/shapley.hpp"

namespace imknn {

// ---------------------------------------------------------------------------
// Neighbor weights and class matrices

/// Distance-relative neighbor weights w_k = (1 - d_k / sum d) / (K - 1).
///
/// K = 1 gives (1); all-zero distances give uniform 1/K.
Eigen::VectorXd compute_weights(const NeighborSet& neighbors);

/// One C x K matrix per class. Row c of matrix c holds the weights of the
/// class-c neighbors at their rank column; every other entry is zero.
struct ClassMatrixSet {
  std::vector<Eigen::MatrixXd> matrices;

  int n_classes() const { return static_cast<int>(matrices.size()); }
};

/// `members` restricts the construction to a coalition of neighbor ranks;
/// excluded columns stay zero.
ClassMatrixSet build_class_matrices(const NeighborSet& neighbors,
                                    const Eigen::Ref<const Eigen::VectorXd>& weights,
                                    int n_classes,
                                    std::optional<Coalition> members = std::nullopt);

// ---------------------------------------------------------------------------
// Coalition values and information values

/// Mean pairwise NMI of the class matrices built from the neighbors in
/// `members`. Zero for the empty coalition and for fewer than two classes.
///
/// Straightforward construction through explicit matrices; `CoalitionGame`
/// computes the same quantity without materializing them.
double coalition_value(const NeighborSet& neighbors, const Eigen::Ref<const Eigen::VectorXd>& weights,
                       Coalition members, int n_classes, int bins);

/// Allocation-free evaluator of `coalition_value` for one query.
///
/// The aligned-cell joint table of class matrices a and b only has mass in
/// row 0 (class-a cells) and column 0 (class-b cells), so it is accumulated
/// directly from the member labels and integer n*log2(n) terms are looked up.
class CoalitionGame {
 public:
  CoalitionGame(const NeighborSet& neighbors, const Eigen::Ref<const Eigen::VectorXd>& weights,
                int n_classes, int bins);

  int players() const { return static_cast<int>(labels_.size()); }
  double operator()(Coalition members) const;

 private:
  double pair_nmi(Coalition members, int a, int b) const;

  std::vector<int> labels_;
  std::vector<double> weights_;
  int n_classes_;
  int bins_;
  std::vector<double> nlogn_;
  mutable std::vector<int> row_counts_;
  mutable std::vector<int> col_counts_;
};

enum class ShapleyKind { Auto, Exact, MonteCarlo };

struct ShapleyConfig {
  ShapleyKind kind = ShapleyKind::Auto;
  /// Auto uses exact enumeration up to this many neighbors.
  int exact_threshold = 12;
  int permutations = 2000;
  /// Draw Monte Carlo orderings biased by neighbor weight.
  bool weight_biased = false;
};

struct ImknnParams {
  int bins = 8;
  ShapleyConfig shapley;
};

struct InfoValues {
  Eigen::VectorXd raw;
  Eigen::VectorXd normalized;
  bool exact = true;
};

/// x / sum|x| when that sum exceeds 1e-12, uniform 1/K otherwise.
Eigen::VectorXd normalize_information(const Eigen::Ref<const Eigen::VectorXd>& raw);

/// Shapley information value of every neighbor under `CoalitionGame`.
/// `seed` drives Monte Carlo sampling only.
InfoValues information_values(const NeighborSet& neighbors,
                              const Eigen::Ref<const Eigen::VectorXd>& weights, int n_classes,
                              const ImknnParams& params, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Prediction

/// Per-class sum of `mass` over neighbors of that class.
Eigen::VectorXd class_vote(const NeighborSet& neighbors, const Eigen::Ref<const Eigen::VectorXd>& mass,
                           int n_classes);

/// alpha * weight vote + (1 - alpha) * information vote.
Eigen::VectorXd blend_scores(const Eigen::Ref<const Eigen::VectorXd>& weight_vote,
                             const Eigen::Ref<const Eigen::VectorXd>& info_vote, double alpha);

struct Prediction {
  int label = 0;
  Eigen::VectorXd scores;
};

struct ImknnModel {
  NeighborIndex index;
  std::size_t k = 5;
  double alpha = 0.5;
  ImknnParams params;
  std::uint64_t seed = 0;
  bool k_from_elbow = false;
  bool alpha_from_grid = false;
};

/// Monte Carlo draws use derive_seed(model.seed, query_id), so results do
/// not depend on the order in which queries are evaluated.
Prediction predict_one(const ImknnModel& model, const Eigen::Ref<const Eigen::VectorXd>& point,
                       std::uint64_t query_id = 0);

/// Argmax of the pure distance-weight vote.
int weighted_vote_predict(const NeighborIndex& index, const Eigen::Ref<const Eigen::VectorXd>& point,
                          std::size_t k);

// ---------------------------------------------------------------------------
// Fitting and hyperparameter selection

std::vector<std::size_t> default_k_grid();
std::vector<double> default_alpha_grid();

struct ImknnConfig {
  std::optional<std::size_t> k = 5;    // nullopt: elbow
  std::optional<double> alpha = 0.5;   // nullopt: grid search
  std::vector<std::size_t> k_grid = default_k_grid();
  std::vector<double> alpha_grid = default_alpha_grid();
  int folds = 5;
  std::uint64_t seed = 0;
  ImknnParams params;
  Metric metric = Metric::Euclidean;
};

ImknnModel fit(const Dataset& train, const ImknnConfig& config);

/// Stratified fold id per row.
std::vector<int> assign_folds(const std::vector<int>& labels, int n_classes, int folds,
                              std::uint64_t seed);

/// K at the largest positive second difference of the error curve; the
/// first minimum-error K when the curve never decreases, has no positive
/// curvature, or has fewer than three points.
std::size_t elbow_from_curve(const std::vector<std::size_t>& k_grid,
                             const std::vector<double>& errors);

/// Cross-validated traditional-KNN error for every K in the grid.
std::vector<double> knn_error_curve(const Dataset& train, const std::vector<std::size_t>& k_grid,
                                    int folds, std::uint64_t seed);

std::size_t select_k_elbow(const Dataset& train, const std::vector<std::size_t>& k_grid, int folds,
                           std::uint64_t seed);

/// Held-out evidence for alpha selection: both vote vectors and the truth.
struct HeldOutVote {
  Eigen::VectorXd weight_vote;
  Eigen::VectorXd info_vote;
  NeighborSet neighbors;
  int truth = 0;
};

/// Grid alpha with the most correct predictions. Ties prefer the value
/// closest to 0.5, then the smaller value.
double alpha_from_votes(const std::vector<HeldOutVote>& votes, const std::vector<double>& alpha_grid);

std::vector<HeldOutVote> cross_validated_votes(const Dataset& train, std::size_t k, int folds,
                                               std::uint64_t seed, const ImknnParams& params);

double select_alpha(const Dataset& train, std::size_t k, const std::vector<double>& alpha_grid,
                    int folds, std::uint64_t seed, const ImknnParams& params = {});

/// Plain-text key=value form of the resolved model parameters.
std::string to_key_value(const ImknnModel& model);

}  // namespace imknn
