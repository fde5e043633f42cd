#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "imknn/dataset.hpp"
#include "imknn/error.hpp"
#include "imknn/neighbors.hpp"
#include "imknn/random.hpp"

namespace test {

inline imknn::NeighborSet make_neighbors(const std::vector<int>& labels, const std::vector<double>& distances) {
  imknn::NeighborSet s;
  for (std::size_t i = 0; i < labels.size(); ++i) s.entries.push_back({i, distances[i], labels[i]});
  return s;
}

/// Scratch file under the build tree, removed by the destructor.
struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path(std::filesystem::temp_directory_path() / ("imknn_test_" + name)) {
    std::ofstream(path) << content;
  }
  ~TempFile() { std::filesystem::remove(path); }
};

inline std::string data_path(const std::string& file) { return std::string(IMKNN_DATA_DIR) + "/" + file; }

inline imknn::RowMatrix random_matrix(imknn::Rng& rng, int rows, int cols, double scale = 1.0) {
  imknn::RowMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * imknn::standard_normal(rng);
  return m;
}

inline imknn::Dataset labelled(imknn::RowMatrix x, std::vector<int> y, int n_classes) {
  imknn::Dataset d;
  d.features = std::move(x);
  d.labels = std::move(y);
  for (int c = 0; c < n_classes; ++c) d.class_names.push_back("c" + std::to_string(c));
  for (Eigen::Index j = 0; j < d.features.cols(); ++j) d.attribute_names.push_back("x" + std::to_string(j));
  return d;
}

}  // namespace test

#define CHECK_ERROR_CODE(expr, expected)                 \
  do {                                                   \
    bool thrown_ = false;                                \
    try {                                                \
      (void)(expr);                                      \
    } catch (const imknn::Error& e) {                    \
      thrown_ = true;                                    \
      CHECK(e.code() == imknn::ErrorCode::expected);     \
    }                                                    \
    CHECK_MESSAGE(thrown_, "expected " #expected);       \
  } while (0)
