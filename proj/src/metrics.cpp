#include "imknn/metrics.hpp"

#include <string>

#include "imknn/error.hpp"

namespace imknn {

MetricSet metrics(std::span<const int> y_true, std::span<const int> y_pred, int n_classes) {
  if (y_true.size() != y_pred.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(y_true.size()) + " truths vs " +
                                               std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw Error(ErrorCode::LengthMismatch, "no predictions to score");

  MetricSet m;
  m.confusion = Eigen::MatrixXi::Zero(n_classes, n_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if (t < 0 || t >= n_classes || p < 0 || p >= n_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "label outside 0.." + std::to_string(n_classes - 1));
    }
    ++m.confusion(t, p);
  }

  m.precision = Eigen::VectorXd::Zero(n_classes);
  m.recall = Eigen::VectorXd::Zero(n_classes);
  m.present.assign(static_cast<std::size_t>(n_classes), false);
  const Eigen::VectorXi row_sums = m.confusion.rowwise().sum();
  const Eigen::VectorXi col_sums = m.confusion.colwise().sum().transpose();
  int n_present = 0;
  for (int c = 0; c < n_classes; ++c) {
    const int tp = m.confusion(c, c);
    if (col_sums(c) > 0) m.precision(c) = static_cast<double>(tp) / col_sums(c);
    if (row_sums(c) > 0) m.recall(c) = static_cast<double>(tp) / row_sums(c);
    if (row_sums(c) > 0 || col_sums(c) > 0) {
      m.present[static_cast<std::size_t>(c)] = true;
      m.macro_precision += m.precision(c);
      m.macro_recall += m.recall(c);
      ++n_present;
    }
  }
  m.macro_precision /= n_present;
  m.macro_recall /= n_present;
  m.accuracy = static_cast<double>(m.confusion.trace()) / static_cast<double>(y_true.size());
  return m;
}

}  // namespace imknn
