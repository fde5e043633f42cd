#include "imknn/information.hpp"

#include <algorithm>
#include <string>

namespace imknn {

JointTable JointTable::from_counts(const Eigen::Ref<const Eigen::MatrixXd>& counts) {
  const double total = counts.sum();
  if (!(total > 0.0) || (counts.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidDistribution, "counts must be nonnegative with a positive total");
  }
  return JointTable{counts / total};
}

void JointTable::validate(double tolerance) const {
  if (p.size() == 0 || (p.array() < 0.0).any() || !p.allFinite() ||
      std::abs(p.sum() - 1.0) > tolerance) {
    throw Error(ErrorCode::InvalidDistribution, "joint table must be nonnegative and sum to 1");
  }
}

double mutual_information(const JointTable& joint) {
  joint.validate();
  const Eigen::VectorXd px = joint.x_marginal();
  const Eigen::VectorXd py = joint.y_marginal();
  double mi = 0.0;
  for (Eigen::Index x = 0; x < joint.p.rows(); ++x) {
    for (Eigen::Index y = 0; y < joint.p.cols(); ++y) {
      const double pxy = joint.p(x, y);
      if (pxy > 0.0) mi += pxy * std::log2(pxy / (px(x) * py(y)));
    }
  }
  return std::max(mi, 0.0);
}

int value_bin(double value, double top, int bins) {
  if (value == 0.0) return 0;
  const auto raw = static_cast<int>(std::floor(value / top * (bins - 1)));
  return 1 + std::clamp(raw, 0, bins - 2);
}

double nmi_from_counts(const Eigen::Ref<const Eigen::MatrixXd>& counts) {
  const double total = counts.sum();
  if (!(total > 0.0)) return 0.0;
  const Eigen::VectorXd px = counts.rowwise().sum() / total;
  const Eigen::VectorXd py = counts.colwise().sum().transpose() / total;
  const double hx = entropy_bits(px);
  const double hy = entropy_bits(py);
  if (hx <= 0.0 || hy <= 0.0) return 0.0;
  double mi = 0.0;
  for (Eigen::Index x = 0; x < counts.rows(); ++x) {
    for (Eigen::Index y = 0; y < counts.cols(); ++y) {
      const double pxy = counts(x, y) / total;
      if (pxy > 0.0) mi += pxy * std::log2(pxy / (px(x) * py(y)));
    }
  }
  return std::clamp(mi / std::sqrt(hx * hy), 0.0, 1.0);
}

double nmi(const Eigen::Ref<const Eigen::MatrixXd>& p_matrix,
           const Eigen::Ref<const Eigen::MatrixXd>& t_matrix, int bins) {
  if (p_matrix.rows() != t_matrix.rows() || p_matrix.cols() != t_matrix.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "class matrices differ in shape");
  }
  if (bins < 2) throw Error(ErrorCode::InvalidParams, "bins must be >= 2");
  if ((p_matrix.array() < 0.0).any() || (t_matrix.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidParams, "class matrices must be nonnegative");
  }
  if (p_matrix.size() == 0) return 0.0;
  const double top = std::max(p_matrix.maxCoeff(), t_matrix.maxCoeff());
  if (!(top > 0.0)) return 0.0;

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(bins, bins);
  for (Eigen::Index r = 0; r < p_matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < p_matrix.cols(); ++c) {
      counts(value_bin(p_matrix(r, c), top, bins), value_bin(t_matrix(r, c), top, bins)) += 1.0;
    }
  }
  return nmi_from_counts(counts);
}

}  // namespace imknn
