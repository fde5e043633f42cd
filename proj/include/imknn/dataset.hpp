#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace imknn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Feature matrix (rows = samples) with dense class ids in 0..C-1.
///
/// A dataset produced by a loader or generator has every class present.
/// Subsets produced by `split` keep the parent's class list, so a class may
/// be absent from a small test portion.
struct Dataset {
  RowMatrix features;
  std::vector<int> labels;
  std::vector<std::string> attribute_names;
  std::vector<std::string> class_names;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
  int n_classes() const { return static_cast<int>(class_names.size()); }

  /// Rows selected by index, in the given order.
  Dataset subset(const std::vector<std::size_t>& rows) const;
  /// Throws if the row/label/class invariants are broken.
  void validate(bool require_all_classes = true) const;
};

struct ScalerParams {
  Eigen::VectorXd means;
  Eigen::VectorXd stddevs;
  std::vector<bool> constant;
};

struct SplitSpec {
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
  bool stratified = true;
};

using LabelColumn = std::variant<std::string, std::size_t>;

/// Column index meaning "the last field of each row".
inline constexpr std::size_t kLastColumn = static_cast<std::size_t>(-1);

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column,
                 bool has_header = true);

/// Writes features plus a trailing label column holding class names.
void write_csv(const Dataset& data, const std::filesystem::path& path,
               const std::string& label_name = "label");

ScalerParams fit_standardizer(const Dataset& train);
Dataset apply_standardizer(const ScalerParams& params, const Dataset& data);
RowMatrix invert_standardizer(const ScalerParams& params, const RowMatrix& standardized);

std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec);

/// Training-row counts per class that `split` produces for `class_size` rows.
std::size_t stratified_train_count(std::size_t class_size, double train_fraction);

/// Isotropic Gaussian clusters. Returns the dataset and its generating ids.
std::pair<Dataset, std::vector<int>> synth_blobs(int n_clusters, int per_cluster, int dim,
                                                 double separation, double spread,
                                                 std::uint64_t seed);

struct SparseNoisySpec {
  int n_samples = 500;
  int dim = 20;
  int n_classes = 2;
  double sparsity = 0.6;
  double label_noise = 0.0;
  double imbalance = 1.0;
  double separation = 3.0;
  std::uint64_t seed = 0;
};

/// Class-clustered data with a fixed fraction of zeroed entries, flipped
/// labels and geometric class sizes.
Dataset synth_sparse_noisy(const SparseNoisySpec& spec);

/// Class sizes in ratio imbalance^-c summing to n (largest remainder).
std::vector<int> geometric_class_sizes(int n, int n_classes, double imbalance);

}  // namespace imknn
