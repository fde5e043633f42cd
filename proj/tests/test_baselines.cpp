#include <doctest.h>

#include <cmath>

#include "imknn/baselines.hpp"
#include "support.hpp"

using namespace imknn;

namespace {

NeighborIndex points_1d(const std::vector<double>& xs, const std::vector<int>& labels, int n_classes) {
  RowMatrix x(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = xs[i];
  return fit_index(test::labelled(x, labels, n_classes));
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("variant ids") {
  CHECK(parse_variant("knn") == Variant::Traditional);
  CHECK(parse_variant("ensemble") == Variant::Ensemble);
  CHECK(to_string(Variant::Mknn) == "mknn");
  CHECK_ERROR_CODE(parse_variant("mutual"), UnknownMethod);
}

TEST_CASE("traditional majority") {
  CHECK(majority_vote(test::make_neighbors({0, 0, 1}, {1, 2, 3}), 2) == 0);
  CHECK(majority_vote(test::make_neighbors({1, 0}, {1, 2}), 2) == 1);
  const NeighborIndex index = points_1d({0, 1, 2, 10}, {0, 1, 1, 0}, 2);
  CHECK(knn_predict(index, Eigen::VectorXd::Constant(1, 9.0), 1) == 0);
  CHECK(knn_predict(index, Eigen::VectorXd::Constant(1, 1.4), 3) == 1);
}

TEST_CASE("kernel weighting") {
  const NeighborSet eq = test::make_neighbors({0, 1, 1, 0, 0}, {2, 2, 2, 2, 2});
  CHECK(kernel_vote(eq, 2) == majority_vote(eq, 2));

  const NeighborSet s = test::make_neighbors({1, 1, 0, 0, 0}, {0.1, 0.1, 10, 10, 10});
  CHECK(kernel_vote(s, 2) == 1);
  const auto w = kernel_weights(s);
  CHECK(std::abs(2 * w(0) - 1.9999000024999583) < 1e-12);
  CHECK(std::abs(3 * w(2) - 1.8195919791379003) < 1e-12);

  const auto z = kernel_weights(test::make_neighbors({0, 1, 1}, {0, 1, 2}));
  CHECK(z(0) == z.maxCoeff());
  CHECK(z(0) == 1.0);
}

TEST_CASE("fuzzy memberships") {
  const auto r = fuzzy_memberships(test::make_neighbors({0, 1}, {1, 2}), 2);
  CHECK(r.membership(0) == doctest::Approx(0.8));
  CHECK(r.label == 0);

  const auto hit = fuzzy_memberships(test::make_neighbors({1, 0, 0}, {0, 1, 2}), 2);
  CHECK(hit.label == 1);
  CHECK(hit.membership(1) == 1.0);

  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = 1 + uniform_index(rng, 9);
    std::vector<int> labels(k);
    std::vector<double> d(k);
    for (std::size_t i = 0; i < k; ++i) {
      labels[i] = static_cast<int>(uniform_index(rng, 3));
      d[i] = 0.1 + uniform01(rng);
    }
    const auto u = fuzzy_memberships(test::make_neighbors(labels, d), 3, 1.5 + uniform01(rng));
    CHECK(u.membership.sum() == doctest::Approx(1.0));
    CHECK(u.membership.minCoeff() >= 0.0);
  }
  CHECK_ERROR_CODE(fuzzy_memberships(test::make_neighbors({0}, {1}), 2, 1.0), InvalidParams);
}

TEST_CASE("MKNN validity and vote") {
  // Two tight homogeneous groups plus one point sitting inside the wrong group.
  const NeighborIndex index = points_1d({0.0, 0.1, 0.2, 5.0, 5.1, 5.2, 0.15}, {0, 0, 0, 1, 1, 1, 1}, 2);
  const MknnModel model(index, 2);
  CHECK(model.validity()[3] == 1.0);
  CHECK(model.validity()[6] == 0.0);
  CHECK(model.predict(Eigen::VectorXd::Constant(1, 0.15), 3) == 0);

  const NeighborSet s = test::make_neighbors({1, 0}, {0.5, 0.5});
  CHECK(mknn_vote(s, {1.0, 0.5}, 2) == 1);
  CHECK(mknn_vote(test::make_neighbors({0, 1}, {0.5, 0.5}), {1.0, 0.5}, 2) == 0);
  CHECK_ERROR_CODE(MknnModel(index, 0), InvalidParams);
}

TEST_CASE("ensemble") {
  CHECK(ensemble_k_max(100) == 10);
  CHECK(ensemble_k_max(3) == 1);
  CHECK(ensemble_rank_weight(1) == 1.0);
  CHECK(ensemble_rank_weight(2) == doctest::Approx(0.6309297535714575));
  CHECK(ensemble_rank_weight(3) == 0.5);
  for (std::size_t r = 1; r < 50; ++r) CHECK(ensemble_rank_weight(r + 1) < ensemble_rank_weight(r));
  CHECK(ensemble_vote(test::make_neighbors({2, 2, 2, 2}, {1, 2, 3, 4}), 3) == 2);
  const NeighborIndex index = points_1d({0, 1, 2, 3, 10, 11, 12, 13, 14}, {0, 0, 0, 0, 1, 1, 1, 1, 1}, 2);
  CHECK(ensemble_knn_predict(index, Eigen::VectorXd::Constant(1, 0.5)) == 0);
}

TEST_CASE("variants agree with majority when distances are equal") {
  Rng rng(12);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 1 + 2 * uniform_index(rng, 5);
    std::vector<int> labels(k);
    for (auto& l : labels) l = static_cast<int>(uniform_index(rng, 3));
    const NeighborSet s = test::make_neighbors(labels, std::vector<double>(k, 1.5));
    const int majority = majority_vote(s, 3);
    CHECK(kernel_vote(s, 3) == majority);
    CHECK(fuzzy_memberships(s, 3).label == majority);
    CHECK(mknn_vote(s, std::vector<double>(k, 1.0), 3) == majority);
  }
}

TEST_CASE("unfitted index") {
  const NeighborIndex none;
  const Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
  CHECK_ERROR_CODE(knn_predict(none, p, 1), NotFitted);
  CHECK_ERROR_CODE(weighted_knn_predict(none, p, 1), NotFitted);
  CHECK_ERROR_CODE(fuzzy_knn_predict(none, p, 1), NotFitted);
  CHECK_ERROR_CODE(ensemble_knn_predict(none, p), NotFitted);
  CHECK_ERROR_CODE(MknnModel(none, 3), NotFitted);
}

}  // TEST_SUITE
