#include "imknn/neighbors.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <utility>

namespace imknn {

namespace {

using Candidate = std::pair<double, std::size_t>;  // (squared distance, train index)

constexpr std::size_t kLeafSize = 8;

NeighborSet to_neighbor_set(std::vector<Candidate> best, const std::vector<int>& labels) {
  std::sort(best.begin(), best.end());
  NeighborSet out;
  out.entries.reserve(best.size());
  for (const auto& [d2, idx] : best) out.entries.push_back({idx, std::sqrt(d2), labels[idx]});
  return out;
}

}  // namespace

Metric parse_metric(std::string_view id) {
  if (id == "euclidean") return Metric::Euclidean;
  throw Error(ErrorCode::UnknownMetric, std::string(id));
}

std::string_view to_string(Metric) { return "euclidean"; }

NeighborSet NeighborSet::prefix(std::size_t k) const {
  NeighborSet out;
  out.query_id = query_id;
  out.entries.assign(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(std::min(k, entries.size())));
  return out;
}

struct NeighborIndex::KdTree {
  struct Node {
    int split_dim = -1;  // -1 marks a leaf
    double split_value = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
  };

  std::vector<Node> nodes;
  std::vector<std::size_t> order;

  explicit KdTree(const RowMatrix& pts) : order(static_cast<std::size_t>(pts.rows())) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    build(pts, 0, order.size());
  }

  std::size_t build(const RowMatrix& pts, std::size_t begin, std::size_t end) {
    const std::size_t id = nodes.size();
    nodes.push_back({});
    nodes[id].begin = begin;
    nodes[id].end = end;
    if (end - begin <= kLeafSize) return id;

    Eigen::Index best_dim = 0;
    double best_spread = -1.0;
    for (Eigen::Index d = 0; d < pts.cols(); ++d) {
      double lo = pts(static_cast<Eigen::Index>(order[begin]), d);
      double hi = lo;
      for (std::size_t i = begin; i < end; ++i) {
        const double v = pts(static_cast<Eigen::Index>(order[i]), d);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = d;
      }
    }
    if (best_spread <= 0.0) return id;

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(begin),
                     order.begin() + static_cast<std::ptrdiff_t>(mid),
                     order.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                       return pts(static_cast<Eigen::Index>(a), best_dim) <
                              pts(static_cast<Eigen::Index>(b), best_dim);
                     });
    const double split = pts(static_cast<Eigen::Index>(order[mid]), best_dim);
    // Left holds values <= split, right values >= split.
    const std::size_t left = build(pts, begin, mid);
    const std::size_t right = build(pts, mid, end);
    nodes[id].split_dim = static_cast<int>(best_dim);
    nodes[id].split_value = split;
    nodes[id].left = left;
    nodes[id].right = right;
    return id;
  }

  void search(const RowMatrix& pts, const Eigen::Ref<const Eigen::VectorXd>& q, std::size_t k,
              std::size_t node_id, std::priority_queue<Candidate>& heap) const {
    const Node& node = nodes[node_id];
    if (node.split_dim < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order[i];
        const Candidate c{squared_euclidean(pts.row(static_cast<Eigen::Index>(idx)).transpose(), q), idx};
        if (heap.size() < k) {
          heap.push(c);
        } else if (c < heap.top()) {
          heap.pop();
          heap.push(c);
        }
      }
      return;
    }
    const double diff = q(node.split_dim) - node.split_value;
    const std::size_t near = diff <= 0.0 ? node.left : node.right;
    const std::size_t far = diff <= 0.0 ? node.right : node.left;
    search(pts, q, k, near, heap);
    // Equal bounds are still visited so that index tie-breaks stay exact.
    if (heap.size() < k || diff * diff <= heap.top().first) search(pts, q, k, far, heap);
  }
};

NeighborIndex::NeighborIndex(const NeighborIndex& other)
    : points_(other.points_),
      labels_(other.labels_),
      n_classes_(other.n_classes_),
      metric_(other.metric_),
      fitted_(other.fitted_),
      tree_(other.tree_ ? std::make_unique<KdTree>(*other.tree_) : nullptr) {}

NeighborIndex& NeighborIndex::operator=(const NeighborIndex& other) {
  if (this != &other) *this = NeighborIndex(other);
  return *this;
}

NeighborIndex::NeighborIndex() = default;
NeighborIndex::NeighborIndex(NeighborIndex&&) noexcept = default;
NeighborIndex& NeighborIndex::operator=(NeighborIndex&&) noexcept = default;
NeighborIndex::~NeighborIndex() = default;

void NeighborIndex::require_fitted() const {
  if (!fitted_) throw Error(ErrorCode::NotFitted, "neighbor index has not been fitted");
}

NeighborSet NeighborIndex::query(const Eigen::Ref<const Eigen::VectorXd>& point, std::size_t k,
                                 SearchPath path) const {
  require_fitted();
  if (k == 0) throw Error(ErrorCode::InvalidK, "k must be >= 1");
  if (static_cast<std::size_t>(point.size()) != dim()) {
    throw Error(ErrorCode::DimensionMismatch, "query has " + std::to_string(point.size()) +
                                                  " attributes, index has " + std::to_string(dim()));
  }
  k = std::min(k, size());

  if (path == SearchPath::Auto) {
    path = (size() >= 512 && dim() <= 12) ? SearchPath::KdTree : SearchPath::BruteForce;
  }

  std::vector<Candidate> best;
  if (path == SearchPath::KdTree) {
    if (!tree_) throw Error(ErrorCode::NotFitted, "kd-tree not built");
    std::priority_queue<Candidate> heap;
    tree_->search(points_, point, k, 0, heap);
    best.reserve(k);
    while (!heap.empty()) {
      best.push_back(heap.top());
      heap.pop();
    }
  } else {
    best.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
      best.emplace_back(squared_euclidean(points_.row(static_cast<Eigen::Index>(i)).transpose(), point), i);
    }
    std::partial_sort(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(k), best.end());
    best.resize(k);
  }
  return to_neighbor_set(std::move(best), labels_);
}

NeighborIndex fit_index(const Dataset& train, Metric metric) {
  if (train.size() == 0) throw Error(ErrorCode::EmptyDataset, "cannot index an empty dataset");
  NeighborIndex index;
  index.points_ = train.features;
  index.labels_ = train.labels;
  index.n_classes_ = train.n_classes();
  index.metric_ = metric;
  index.tree_ = std::make_unique<NeighborIndex::KdTree>(index.points_);
  index.fitted_ = true;
  return index;
}

NeighborIndex fit_index(const Dataset& train, std::string_view metric_id) {
  return fit_index(train, parse_metric(metric_id));
}

int argmax_nearest_tiebreak(const Eigen::Ref<const Eigen::VectorXd>& scores,
                            const NeighborSet& neighbors, double tolerance) {
  const double top = scores.maxCoeff();
  auto tied = [&](int c) { return scores(c) >= top - tolerance; };
  for (const auto& n : neighbors.entries) {
    if (n.label >= 0 && n.label < scores.size() && tied(n.label)) return n.label;
  }
  for (int c = 0; c < scores.size(); ++c) {
    if (tied(c)) return c;
  }
  return 0;
}

}  // namespace imknn
