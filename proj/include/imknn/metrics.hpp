#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace imknn {

struct MetricSet {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  Eigen::VectorXd precision;  // per class, 0/0 := 0
  Eigen::VectorXd recall;     // per class, 0/0 := 0
  Eigen::MatrixXi confusion;  // rows: truth, columns: prediction
  std::vector<bool> present;  // class occurs in truth or prediction
};

/// Macro averages run over the classes present in y_true or y_pred.
MetricSet metrics(std::span<const int> y_true, std::span<const int> y_pred, int n_classes);

}  // namespace imknn
