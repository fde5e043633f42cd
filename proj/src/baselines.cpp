#include "imknn/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace imknn {

namespace {

Eigen::VectorXd tally(const NeighborSet& neighbors, int n_classes, auto&& mass) {
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(n_classes);
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    const int label = neighbors[j].label;
    if (label < 0 || label >= n_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "neighbor label " + std::to_string(label));
    }
    scores(label) += mass(j);
  }
  return scores;
}

void require(const NeighborIndex& index) {
  if (!index.fitted()) throw Error(ErrorCode::NotFitted, "neighbor index has not been fitted");
}

}  // namespace

Variant parse_variant(std::string_view id) {
  if (id == "knn") return Variant::Traditional;
  if (id == "weighted") return Variant::Weighted;
  if (id == "fuzzy") return Variant::Fuzzy;
  if (id == "mknn") return Variant::Mknn;
  if (id == "ensemble") return Variant::Ensemble;
  throw Error(ErrorCode::UnknownMethod, std::string(id));
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Traditional: return "knn";
    case Variant::Weighted: return "weighted";
    case Variant::Fuzzy: return "fuzzy";
    case Variant::Mknn: return "mknn";
    case Variant::Ensemble: return "ensemble";
  }
  return "knn";
}

int majority_vote(const NeighborSet& neighbors, int n_classes) {
  return argmax_nearest_tiebreak(tally(neighbors, n_classes, [](std::size_t) { return 1.0; }), neighbors);
}

int knn_predict(const NeighborIndex& index, const Eigen::Ref<const Eigen::VectorXd>& point,
                std::size_t k) {
  require(index);
  return majority_vote(index.query(point, k), index.n_classes());
}

Eigen::VectorXd kernel_weights(const NeighborSet& neighbors) {
  const std::size_t k = neighbors.size();
  std::vector<double> d;
  d.reserve(k);
  for (const auto& n : neighbors.entries) d.push_back(n.distance);
  std::sort(d.begin(), d.end());
  double h = k == 0 ? 1.0 : (k % 2 ? d[k / 2] : 0.5 * (d[k / 2 - 1] + d[k / 2]));
  if (!(h > 0.0)) h = 1.0;

  Eigen::VectorXd w(static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    const double dist = neighbors[j].distance;
    w(static_cast<Eigen::Index>(j)) = std::exp(-dist * dist / (2.0 * h * h));
  }
  return w;
}

int kernel_vote(const NeighborSet& neighbors, int n_classes) {
  const Eigen::VectorXd w = kernel_weights(neighbors);
  return argmax_nearest_tiebreak(
      tally(neighbors, n_classes, [&](std::size_t j) { return w(static_cast<Eigen::Index>(j)); }), neighbors);
}

int weighted_knn_predict(const NeighborIndex& index, const Eigen::Ref<const Eigen::VectorXd>& point,
                         std::size_t k) {
  require(index);
  return kernel_vote(index.query(point, k), index.n_classes());
}

FuzzyResult fuzzy_memberships(const NeighborSet& neighbors, int n_classes, double m) {
  if (!(m > 1.0)) throw Error(ErrorCode::InvalidParams, "fuzzy exponent m must exceed 1");
  FuzzyResult out;
  for (const auto& n : neighbors.entries) {
    if (n.distance == 0.0) {
      out.membership = Eigen::VectorXd::Zero(n_classes);
      out.membership(n.label) = 1.0;
      out.label = n.label;
      return out;
    }
  }
  const double exponent = -2.0 / (m - 1.0);
  const Eigen::VectorXd raw = tally(neighbors, n_classes, [&](std::size_t j) {
    return std::pow(neighbors[j].distance, exponent);
  });
  out.membership = raw / raw.sum();
  out.label = argmax_nearest_tiebreak(out.membership, neighbors);
  return out;
}

FuzzyResult fuzzy_knn_predict(const NeighborIndex& index, const Eigen::Ref<const Eigen::VectorXd>& point,
                              std::size_t k, double m) {
  require(index);
  return fuzzy_memberships(index.query(point, k), index.n_classes(), m);
}

MknnModel::MknnModel(NeighborIndex index, std::size_t h) : index_(std::move(index)), h_(h) {
  require(index_);
  if (h_ == 0) throw Error(ErrorCode::InvalidParams, "MKNN validity neighborhood H must be >= 1");
  validity_.resize(index_.size(), 0.0);
  const auto& pts = index_.points();
  for (std::size_t t = 0; t < index_.size(); ++t) {
    const auto found = index_.query(pts.row(static_cast<Eigen::Index>(t)).transpose(), h_ + 1);
    std::size_t same = 0;
    std::size_t used = 0;
    for (const auto& n : found.entries) {
      if (n.train_index == t || used == h_) continue;
      ++used;
      same += n.label == index_.labels()[t];
    }
    validity_[t] = used ? static_cast<double>(same) / static_cast<double>(used) : 0.0;
  }
}

int MknnModel::predict(const Eigen::Ref<const Eigen::VectorXd>& point, std::size_t k) const {
  require(index_);
  return mknn_vote(index_.query(point, k), validity_, index_.n_classes());
}

int mknn_vote(const NeighborSet& neighbors, const std::vector<double>& validity, int n_classes) {
  return argmax_nearest_tiebreak(tally(neighbors, n_classes,
                                       [&](std::size_t j) {
                                         return validity.at(neighbors[j].train_index) /
                                                (neighbors[j].distance + 0.5);
                                       }),
                                 neighbors);
}

std::size_t ensemble_k_max(std::size_t train_size) {
  auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(train_size)));
  while (k * k > train_size) --k;
  while ((k + 1) * (k + 1) <= train_size) ++k;
  return std::max<std::size_t>(k, 1);
}

double ensemble_rank_weight(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 1.0); }

int ensemble_vote(const NeighborSet& neighbors, int n_classes) {
  return argmax_nearest_tiebreak(
      tally(neighbors, n_classes, [](std::size_t j) { return ensemble_rank_weight(j + 1); }), neighbors);
}

int ensemble_knn_predict(const NeighborIndex& index, const Eigen::Ref<const Eigen::VectorXd>& point) {
  require(index);
  return ensemble_vote(index.query(point, ensemble_k_max(index.size())), index.n_classes());
}

}  // namespace imknn
