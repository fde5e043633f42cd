#pragma once

#include <cmath>
#include <cstddef>

#include <Eigen/Core>

#include "imknn/error.hpp"

namespace imknn {

/// Joint distribution over (x-bin, y-bin) pairs, rows indexing x.
struct JointTable {
  Eigen::MatrixXd p;

  static JointTable from_counts(const Eigen::Ref<const Eigen::MatrixXd>& counts);

  Eigen::VectorXd x_marginal() const { return p.rowwise().sum(); }
  Eigen::VectorXd y_marginal() const { return p.colwise().sum().transpose(); }
  /// Throws InvalidDistribution unless entries are >= 0 and sum to 1.
  void validate(double tolerance = 1e-9) const;
};

/// Shannon entropy in bits; zero-probability cells contribute nothing.
template <typename Derived>
double entropy_bits(const Eigen::DenseBase<Derived>& probs) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double v = probs.derived().coeff(i);
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

/// I(X;Y) in bits.
double mutual_information(const JointTable& joint);

/// Quantization of nonnegative cell values: exact zeros go to bin 0, the
/// rest to bins 1..B-1 of equal width over (0, top].
int value_bin(double value, double top, int bins);

/// Normalized mutual information of two equally shaped nonnegative
/// matrices: aligned cells are paired, both quantized against the larger of
/// the two maxima. Zero when either side has zero entropy.
double nmi(const Eigen::Ref<const Eigen::MatrixXd>& p_matrix,
           const Eigen::Ref<const Eigen::MatrixXd>& t_matrix, int bins);

/// NMI from a count table: I / sqrt(H(X) H(Y)), clamped to [0, 1].
double nmi_from_counts(const Eigen::Ref<const Eigen::MatrixXd>& counts);

}  // namespace imknn
