#include "imknn/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "imknn/baselines.hpp"
#include "imknn/information.hpp"
#include "imknn/random.hpp"

namespace imknn {

Eigen::VectorXd compute_weights(const NeighborSet& neighbors) {
  const auto k = static_cast<Eigen::Index>(neighbors.size());
  if (k == 0) throw Error(ErrorCode::InvalidK, "weights need at least one neighbor");
  if (k == 1) return Eigen::VectorXd::Ones(1);

  double total = 0.0;
  for (const auto& n : neighbors.entries) total += n.distance;
  if (!(total > 0.0)) return Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));

  Eigen::VectorXd w(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    w(i) = (1.0 - neighbors[static_cast<std::size_t>(i)].distance / total) / static_cast<double>(k - 1);
  }
  return w;
}

ClassMatrixSet build_class_matrices(const NeighborSet& neighbors,
                                    const Eigen::Ref<const Eigen::VectorXd>& weights, int n_classes,
                                    std::optional<Coalition> members) {
  const auto k = static_cast<Eigen::Index>(neighbors.size());
  if (weights.size() != k) throw Error(ErrorCode::DimensionMismatch, "one weight per neighbor");
  if (n_classes < 1) throw Error(ErrorCode::InvalidParams, "need at least one class");

  ClassMatrixSet out;
  out.matrices.assign(static_cast<std::size_t>(n_classes), Eigen::MatrixXd::Zero(n_classes, k));
  for (Eigen::Index j = 0; j < k; ++j) {
    const int label = neighbors[static_cast<std::size_t>(j)].label;
    if (label < 0 || label >= n_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "neighbor label " + std::to_string(label));
    }
    if (members && !(*members & (Coalition{1} << j))) continue;
    out.matrices[static_cast<std::size_t>(label)](label, j) = weights(j);
  }
  return out;
}

double coalition_value(const NeighborSet& neighbors, const Eigen::Ref<const Eigen::VectorXd>& weights,
                       Coalition members, int n_classes, int bins) {
  if (members == 0 || n_classes < 2) return 0.0;
  const auto set = build_class_matrices(neighbors, weights, n_classes, members);
  double total = 0.0;
  int pairs = 0;
  for (int a = 0; a < n_classes; ++a) {
    for (int b = a + 1; b < n_classes; ++b, ++pairs) {
      total += nmi(set.matrices[static_cast<std::size_t>(a)], set.matrices[static_cast<std::size_t>(b)], bins);
    }
  }
  return total / pairs;
}

CoalitionGame::CoalitionGame(const NeighborSet& neighbors,
                             const Eigen::Ref<const Eigen::VectorXd>& weights, int n_classes,
                             int bins)
    : weights_(weights.data(), weights.data() + weights.size()),
      n_classes_(n_classes),
      bins_(bins),
      row_counts_(static_cast<std::size_t>(bins), 0),
      col_counts_(static_cast<std::size_t>(bins), 0) {
  if (weights.size() != static_cast<Eigen::Index>(neighbors.size())) {
    throw Error(ErrorCode::DimensionMismatch, "one weight per neighbor");
  }
  if (bins < 2) throw Error(ErrorCode::InvalidParams, "bins must be >= 2");
  if (neighbors.size() > 63) throw Error(ErrorCode::InvalidParams, "at most 63 neighbors");
  labels_.reserve(neighbors.size());
  for (const auto& n : neighbors.entries) {
    if (n.label < 0 || n.label >= n_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "neighbor label " + std::to_string(n.label));
    }
    labels_.push_back(n.label);
  }
  const std::size_t cells = static_cast<std::size_t>(n_classes) * labels_.size();
  nlogn_.resize(cells + 1, 0.0);
  for (std::size_t n = 2; n <= cells; ++n) nlogn_[n] = static_cast<double>(n) * std::log2(static_cast<double>(n));
}

double CoalitionGame::pair_nmi(Coalition members, int a, int b) const {
  double top = 0.0;
  for (std::size_t j = 0; j < labels_.size(); ++j) {
    if ((members >> j) & 1U && (labels_[j] == a || labels_[j] == b)) top = std::max(top, weights_[j]);
  }
  if (!(top > 0.0)) return 0.0;

  std::fill(row_counts_.begin(), row_counts_.end(), 0);
  std::fill(col_counts_.begin(), col_counts_.end(), 0);
  int in_rows = 0;
  int in_cols = 0;
  for (std::size_t j = 0; j < labels_.size(); ++j) {
    if (!((members >> j) & 1U)) continue;
    const int bin = value_bin(weights_[j], top, bins_);
    if (bin == 0) continue;
    if (labels_[j] == a) {
      ++row_counts_[static_cast<std::size_t>(bin)];
      ++in_rows;
    } else if (labels_[j] == b) {
      ++col_counts_[static_cast<std::size_t>(bin)];
      ++in_cols;
    }
  }
  const auto total = static_cast<int>(nlogn_.size() - 1);
  const int zero_zero = total - in_rows - in_cols;

  double joint = nlogn_[static_cast<std::size_t>(zero_zero)];
  double x_terms = nlogn_[static_cast<std::size_t>(zero_zero + in_cols)];
  double y_terms = nlogn_[static_cast<std::size_t>(zero_zero + in_rows)];
  for (int bin = 1; bin < bins_; ++bin) {
    const double r = nlogn_[static_cast<std::size_t>(row_counts_[static_cast<std::size_t>(bin)])];
    const double c = nlogn_[static_cast<std::size_t>(col_counts_[static_cast<std::size_t>(bin)])];
    joint += r + c;
    x_terms += r;
    y_terms += c;
  }
  const double n = static_cast<double>(total);
  const double log_n = std::log2(n);
  const double hx = log_n - x_terms / n;
  const double hy = log_n - y_terms / n;
  if (hx <= 1e-12 || hy <= 1e-12) return 0.0;
  const double mi = log_n + (joint - x_terms - y_terms) / n;
  return std::clamp(mi / std::sqrt(hx * hy), 0.0, 1.0);
}

double CoalitionGame::operator()(Coalition members) const {
  if (members == 0 || n_classes_ < 2) return 0.0;
  double total = 0.0;
  int pairs = 0;
  for (int a = 0; a < n_classes_; ++a) {
    for (int b = a + 1; b < n_classes_; ++b, ++pairs) total += pair_nmi(members, a, b);
  }
  return total / pairs;
}

Eigen::VectorXd normalize_information(const Eigen::Ref<const Eigen::VectorXd>& raw) {
  const double denom = raw.cwiseAbs().sum();
  if (denom > 1e-12) return raw / denom;
  return Eigen::VectorXd::Constant(raw.size(), 1.0 / static_cast<double>(raw.size()));
}

InfoValues information_values(const NeighborSet& neighbors,
                              const Eigen::Ref<const Eigen::VectorXd>& weights, int n_classes,
                              const ImknnParams& params, std::uint64_t seed) {
  const int k = static_cast<int>(neighbors.size());
  if (k < 1) throw Error(ErrorCode::InvalidK, "information values need at least one neighbor");
  const auto& sc = params.shapley;
  const CoalitionGame game(neighbors, weights, n_classes, params.bins);

  InfoValues out;
  out.exact = sc.kind == ShapleyKind::Exact ||
              (sc.kind == ShapleyKind::Auto && k <= sc.exact_threshold);
  if (out.exact) {
    out.raw = exact_shapley(k, game);
  } else {
    if (sc.permutations < 1) throw Error(ErrorCode::InvalidParams, "0 Monte Carlo samples");
    MemoizedGame memo(k, [&game](Coalition s) { return game(s); });
    MonteCarloOptions opts;
    opts.permutations = sc.permutations;
    opts.seed = seed;
    if (sc.weight_biased) opts.bias = Eigen::VectorXd(weights);
    out.raw = monte_carlo_shapley(k, memo, opts);
  }
  out.normalized = normalize_information(out.raw);
  return out;
}

Eigen::VectorXd class_vote(const NeighborSet& neighbors, const Eigen::Ref<const Eigen::VectorXd>& mass,
                           int n_classes) {
  if (mass.size() != static_cast<Eigen::Index>(neighbors.size())) {
    throw Error(ErrorCode::DimensionMismatch, "one vote mass per neighbor");
  }
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(n_classes);
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    const int label = neighbors[j].label;
    if (label < 0 || label >= n_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "neighbor label " + std::to_string(label));
    }
    scores(label) += mass(static_cast<Eigen::Index>(j));
  }
  return scores;
}

Eigen::VectorXd blend_scores(const Eigen::Ref<const Eigen::VectorXd>& weight_vote,
                             const Eigen::Ref<const Eigen::VectorXd>& info_vote, double alpha) {
  return alpha * weight_vote + (1.0 - alpha) * info_vote;
}

Prediction predict_one(const ImknnModel& model, const Eigen::Ref<const Eigen::VectorXd>& point,
                       std::uint64_t query_id) {
  if (!model.index.fitted()) throw Error(ErrorCode::NotFitted, "IMKNN model has not been fitted");
  NeighborSet neighbors = model.index.query(point, model.k);
  neighbors.query_id = query_id;
  const int n_classes = model.index.n_classes();
  const Eigen::VectorXd w = compute_weights(neighbors);
  const Eigen::VectorXd weight_vote = class_vote(neighbors, w, n_classes);

  Eigen::VectorXd info_vote = Eigen::VectorXd::Zero(n_classes);
  if (model.alpha < 1.0) {
    const auto info = information_values(neighbors, w, n_classes, model.params,
                                         derive_seed(model.seed, query_id));
    info_vote = class_vote(neighbors, info.normalized, n_classes);
  }
  Prediction out;
  out.scores = blend_scores(weight_vote, info_vote, model.alpha);
  out.label = argmax_nearest_tiebreak(out.scores, neighbors);
  return out;
}

int weighted_vote_predict(const NeighborIndex& index, const Eigen::Ref<const Eigen::VectorXd>& point,
                          std::size_t k) {
  const NeighborSet neighbors = index.query(point, k);
  const Eigen::VectorXd scores = class_vote(neighbors, compute_weights(neighbors), index.n_classes());
  return argmax_nearest_tiebreak(scores, neighbors);
}

std::vector<std::size_t> default_k_grid() { return {3, 5, 7, 9, 11, 13}; }

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

ImknnModel fit(const Dataset& train, const ImknnConfig& config) {
  if (train.size() == 0) throw Error(ErrorCode::EmptyDataset, "cannot fit IMKNN on no data");
  if (config.k && *config.k == 0) throw Error(ErrorCode::InvalidK, "K must be >= 1");
  if (config.alpha && !(*config.alpha >= 0.0 && *config.alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "alpha must lie in [0,1]");
  }
  if (config.params.bins < 2) throw Error(ErrorCode::InvalidParams, "bins must be >= 2");

  ImknnModel model;
  model.index = fit_index(train, config.metric);
  model.params = config.params;
  model.seed = config.seed;
  model.k_from_elbow = !config.k.has_value();
  model.alpha_from_grid = !config.alpha.has_value();
  model.k = config.k ? *config.k
                     : select_k_elbow(train, config.k_grid, config.folds, derive_seed(config.seed, 1));
  model.alpha = config.alpha ? *config.alpha
                             : select_alpha(train, model.k, config.alpha_grid, config.folds,
                                            derive_seed(config.seed, 2), config.params);
  return model;
}

std::vector<int> assign_folds(const std::vector<int>& labels, int n_classes, int folds,
                              std::uint64_t seed) {
  if (folds < 2 || static_cast<std::size_t>(folds) > labels.size()) {
    throw Error(ErrorCode::InfeasibleFolds, std::to_string(folds) + " folds over " +
                                                std::to_string(labels.size()) + " rows");
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(std::max(n_classes, 1)));
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  std::vector<int> fold_of(labels.size(), 0);
  int next = 0;
  for (auto& rows : by_class) {
    shuffle(rows, rng);
    for (const auto row : rows) {
      fold_of[row] = next;
      next = (next + 1) % folds;
    }
  }
  return fold_of;
}

std::size_t elbow_from_curve(const std::vector<std::size_t>& k_grid, const std::vector<double>& errors) {
  if (k_grid.empty() || k_grid.size() != errors.size()) {
    throw Error(ErrorCode::InvalidParams, "elbow needs one error per grid point");
  }
  const auto argmin = static_cast<std::size_t>(std::min_element(errors.begin(), errors.end()) - errors.begin());
  if (k_grid.size() < 3) return k_grid[argmin];

  bool ever_decreases = false;
  for (std::size_t j = 1; j < errors.size(); ++j) ever_decreases |= errors[j] < errors[j - 1];
  if (!ever_decreases) return k_grid[argmin];

  std::size_t best = 0;
  double best_curvature = 0.0;
  for (std::size_t j = 1; j + 1 < errors.size(); ++j) {
    const double curvature = errors[j - 1] - 2.0 * errors[j] + errors[j + 1];
    if (curvature > best_curvature) {
      best_curvature = curvature;
      best = j;
    }
  }
  return best == 0 ? k_grid[argmin] : k_grid[best];
}

namespace {

struct FoldSplit {
  Dataset train;
  std::vector<std::size_t> held_out;
};

std::vector<FoldSplit> make_folds(const Dataset& data, int folds, std::uint64_t seed) {
  const auto fold_of = assign_folds(data.labels, data.n_classes(), folds, seed);
  std::vector<FoldSplit> out;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> in;
    FoldSplit split;
    for (std::size_t i = 0; i < data.size(); ++i) {
      (fold_of[i] == f ? split.held_out : in).push_back(i);
    }
    split.train = data.subset(in);
    out.push_back(std::move(split));
  }
  return out;
}

}  // namespace

std::vector<double> knn_error_curve(const Dataset& train, const std::vector<std::size_t>& k_grid,
                                    int folds, std::uint64_t seed) {
  if (k_grid.empty()) throw Error(ErrorCode::InvalidParams, "empty K grid");
  const std::size_t k_max = *std::max_element(k_grid.begin(), k_grid.end());
  std::vector<double> wrong(k_grid.size(), 0.0);
  for (const auto& fold : make_folds(train, folds, seed)) {
    const auto index = fit_index(fold.train);
    for (const auto row : fold.held_out) {
      const auto neighbors = index.query(train.features.row(static_cast<Eigen::Index>(row)).transpose(), k_max);
      for (std::size_t g = 0; g < k_grid.size(); ++g) {
        if (majority_vote(neighbors.prefix(k_grid[g]), train.n_classes()) != train.labels[row]) wrong[g] += 1.0;
      }
    }
  }
  for (auto& e : wrong) e /= static_cast<double>(train.size());
  return wrong;
}

std::size_t select_k_elbow(const Dataset& train, const std::vector<std::size_t>& k_grid, int folds,
                           std::uint64_t seed) {
  if (k_grid.empty()) throw Error(ErrorCode::InvalidParams, "empty K grid");
  if (std::find(k_grid.begin(), k_grid.end(), std::size_t{0}) != k_grid.end()) {
    throw Error(ErrorCode::InvalidK, "K grid contains 0");
  }
  if (k_grid.size() == 1) return k_grid.front();
  return elbow_from_curve(k_grid, knn_error_curve(train, k_grid, folds, seed));
}

double alpha_from_votes(const std::vector<HeldOutVote>& votes, const std::vector<double>& alpha_grid) {
  if (alpha_grid.empty()) throw Error(ErrorCode::InvalidParams, "empty alpha grid");
  double best_alpha = alpha_grid.front();
  long best_correct = -1;
  for (const double alpha : alpha_grid) {
    long correct = 0;
    for (const auto& v : votes) {
      correct += argmax_nearest_tiebreak(blend_scores(v.weight_vote, v.info_vote, alpha), v.neighbors) == v.truth;
    }
    const double dist = std::abs(alpha - 0.5);
    const double best_dist = std::abs(best_alpha - 0.5);
    if (correct > best_correct ||
        (correct == best_correct &&
         (dist < best_dist - 1e-12 || (std::abs(dist - best_dist) <= 1e-12 && alpha < best_alpha)))) {
      best_correct = correct;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

std::vector<HeldOutVote> cross_validated_votes(const Dataset& train, std::size_t k, int folds,
                                               std::uint64_t seed, const ImknnParams& params) {
  std::vector<HeldOutVote> votes;
  votes.reserve(train.size());
  for (const auto& fold : make_folds(train, folds, seed)) {
    const auto index = fit_index(fold.train);
    for (const auto row : fold.held_out) {
      HeldOutVote v;
      v.neighbors = index.query(train.features.row(static_cast<Eigen::Index>(row)).transpose(), k);
      const Eigen::VectorXd w = compute_weights(v.neighbors);
      const auto info = information_values(v.neighbors, w, train.n_classes(), params, derive_seed(seed, row));
      v.weight_vote = class_vote(v.neighbors, w, train.n_classes());
      v.info_vote = class_vote(v.neighbors, info.normalized, train.n_classes());
      v.truth = train.labels[row];
      votes.push_back(std::move(v));
    }
  }
  return votes;
}

double select_alpha(const Dataset& train, std::size_t k, const std::vector<double>& alpha_grid,
                    int folds, std::uint64_t seed, const ImknnParams& params) {
  if (alpha_grid.empty()) throw Error(ErrorCode::InvalidParams, "empty alpha grid");
  for (const double a : alpha_grid) {
    if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorCode::InvalidParams, "alpha grid outside [0,1]");
  }
  if (alpha_grid.size() == 1) return alpha_grid.front();
  return alpha_from_votes(cross_validated_votes(train, k, folds, seed, params), alpha_grid);
}

std::string to_key_value(const ImknnModel& model) {
  const auto& sc = model.params.shapley;
  std::ostringstream out;
  out.precision(17);
  out << "k=" << model.k << '\n'
      << "k_policy=" << (model.k_from_elbow ? "elbow" : "fixed") << '\n'
      << "alpha=" << model.alpha << '\n'
      << "alpha_policy=" << (model.alpha_from_grid ? "grid" : "fixed") << '\n'
      << "bins=" << model.params.bins << '\n'
      << "shapley=" << (sc.kind == ShapleyKind::Exact ? "exact" : sc.kind == ShapleyKind::MonteCarlo ? "mc" : "auto") << '\n'
      << "exact_threshold=" << sc.exact_threshold << '\n'
      << "permutations=" << sc.permutations << '\n'
      << "weight_biased=" << (sc.weight_biased ? "true" : "false") << '\n'
      << "metric=" << to_string(model.index.metric()) << '\n'
      << "train_size=" << model.index.size() << '\n'
      << "seed=" << model.seed << '\n';
  return out.str();
}

}  // namespace imknn
