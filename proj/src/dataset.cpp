#include "imknn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "imknn/error.hpp"
#include "imknn/random.hpp"

namespace imknn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_real(std::string_view field, double& value) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InfeasibleStratification: return "InfeasibleStratification";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::UnknownMetric: return "UnknownMetric";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotFitted: return "NotFitted";
    case ErrorCode::InfeasibleFolds: return "InfeasibleFolds";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorCode::UnknownMethod: return "UnknownMethod";
    case ErrorCode::UnknownDataset: return "UnknownDataset";
  }
  return "Error";
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(labels[rows[i]]);
  }
  out.attribute_names = attribute_names;
  out.class_names = class_names;
  return out;
}

void Dataset::validate(bool require_all_classes) const {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "feature rows and label count differ");
  }
  std::vector<bool> seen(class_names.size(), false);
  for (const int label : labels) {
    if (label < 0 || label >= n_classes()) {
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(label));
    }
    seen[static_cast<std::size_t>(label)] = true;
  }
  if (require_all_classes && std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorCode::LabelOutOfRange, "a declared class has no samples");
  }
}

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column,
                 bool has_header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());

  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::map<std::string, int, std::less<>> class_ids;

  std::size_t n_fields = 0;
  std::size_t label_idx = 0;

  auto resolve_label = [&](std::size_t width) {
    if (const auto* idx = std::get_if<std::size_t>(&label_column)) {
      label_idx = *idx == kLastColumn ? width - 1 : *idx;
    } else {
      const auto& name = std::get<std::string>(label_column);
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) {
        throw Error(ErrorCode::ParseError, "label column '" + name + "' not in header");
      }
      label_idx = static_cast<std::size_t>(it - header.begin());
    }
    if (label_idx >= width) {
      throw Error(ErrorCode::ParseError, "label column index " + std::to_string(label_idx) +
                                             " out of range");
    }
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (line_no == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    if (trim(view).empty()) continue;
    auto fields = split_fields(view);

    if (has_header && header.empty()) {
      for (const auto f : fields) header.emplace_back(f);
      n_fields = header.size();
      resolve_label(n_fields);
      continue;
    }
    if (n_fields == 0) {
      n_fields = fields.size();
      if (std::holds_alternative<std::string>(label_column)) {
        throw Error(ErrorCode::ParseError, "label column by name requires a header");
      }
      resolve_label(n_fields);
    }
    if (fields.size() < n_fields) {
      throw Error(ErrorCode::MissingValue, "row at line " + std::to_string(line_no));
    }
    if (fields.size() > n_fields) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": too many fields");
    }

    std::vector<double> row;
    row.reserve(n_fields - 1);
    for (std::size_t c = 0; c < n_fields; ++c) {
      if (fields[c].empty()) {
        throw Error(ErrorCode::MissingValue, "row at line " + std::to_string(line_no) +
                                                 ", column " + std::to_string(c));
      }
      if (c == label_idx) continue;
      double v = 0.0;
      if (!parse_real(fields[c], v)) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column " +
                                               std::to_string(c) + ": '" +
                                               std::string(fields[c]) + "'");
      }
      row.push_back(v);
    }
    const std::string_view label_text = fields[label_idx];
    auto it = class_ids.find(label_text);
    if (it == class_ids.end()) {
      it = class_ids.emplace(std::string(label_text), static_cast<int>(class_names.size())).first;
      class_names.emplace_back(label_text);
    }
    labels.push_back(it->second);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyDataset, path.string());

  Dataset out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(n_fields - 1);
  out.features.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out.features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  out.labels = std::move(labels);
  out.class_names = std::move(class_names);
  for (std::size_t c = 0; c < n_fields; ++c) {
    if (c == label_idx) continue;
    out.attribute_names.push_back(has_header ? header[c] : "x" + std::to_string(out.attribute_names.size()));
  }
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path,
               const std::string& label_name) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::FileNotFound, path.string());
  out.precision(17);
  for (std::size_t j = 0; j < data.dim(); ++j) {
    out << (j < data.attribute_names.size() ? data.attribute_names[j] : "x" + std::to_string(j)) << ',';
  }
  out << label_name << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) {
      out << data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << ',';
    }
    out << data.class_names[static_cast<std::size_t>(data.labels[i])] << '\n';
  }
}

ScalerParams fit_standardizer(const Dataset& train) {
  if (train.size() == 0) throw Error(ErrorCode::EmptyDataset, "cannot fit standardizer");
  ScalerParams p;
  p.means = train.features.colwise().mean().transpose();
  const RowMatrix centered = train.features.rowwise() - p.means.transpose();
  p.stddevs = (centered.array().square().colwise().sum() / static_cast<double>(train.size()))
                  .sqrt()
                  .transpose();
  p.constant.resize(static_cast<std::size_t>(p.stddevs.size()));
  for (Eigen::Index j = 0; j < p.stddevs.size(); ++j) {
    p.constant[static_cast<std::size_t>(j)] = p.stddevs(j) < 1e-12;
  }
  return p;
}

Dataset apply_standardizer(const ScalerParams& params, const Dataset& data) {
  if (static_cast<std::size_t>(params.means.size()) != data.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "scaler has " + std::to_string(params.means.size()) +
                                                  " attributes, data has " +
                                                  std::to_string(data.dim()));
  }
  Dataset out = data;
  for (Eigen::Index j = 0; j < out.features.cols(); ++j) {
    if (params.constant[static_cast<std::size_t>(j)]) {
      out.features.col(j).setZero();
    } else {
      out.features.col(j) = (out.features.col(j).array() - params.means(j)) / params.stddevs(j);
    }
  }
  return out;
}

RowMatrix invert_standardizer(const ScalerParams& params, const RowMatrix& standardized) {
  RowMatrix out = standardized;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double scale = params.constant[static_cast<std::size_t>(j)] ? 0.0 : params.stddevs(j);
    out.col(j) = out.col(j).array() * scale + params.means(j);
  }
  return out;
}

std::size_t stratified_train_count(std::size_t class_size, double train_fraction) {
  const auto raw = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(class_size)));
  return std::clamp<std::size_t>(raw, 1, class_size - 1);
}

std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidParams, "train_fraction must lie in (0,1)");
  }
  if (data.size() < 2) throw Error(ErrorCode::EmptyDataset, "need at least 2 rows to split");

  Rng rng(spec.seed);
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;

  auto take = [&](std::vector<std::size_t>& pool, std::size_t n_train) {
    shuffle(pool, rng);
    train_rows.insert(train_rows.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_rows.insert(test_rows.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_train), pool.end());
  };

  if (spec.stratified) {
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(data.n_classes()));
    for (std::size_t i = 0; i < data.size(); ++i) by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      if (by_class[c].empty()) continue;
      if (by_class[c].size() < 2) {
        throw Error(ErrorCode::InfeasibleStratification,
                    "class '" + data.class_names[c] + "' has fewer than 2 samples");
      }
    }
    for (auto& pool : by_class) {
      if (!pool.empty()) take(pool, stratified_train_count(pool.size(), spec.train_fraction));
    }
  } else {
    std::vector<std::size_t> pool(data.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    take(pool, stratified_train_count(pool.size(), spec.train_fraction));
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {data.subset(train_rows), data.subset(test_rows)};
}

std::pair<Dataset, std::vector<int>> synth_blobs(int n_clusters, int per_cluster, int dim,
                                                 double separation, double spread,
                                                 std::uint64_t seed) {
  if (n_clusters < 2 || per_cluster < 2 || dim < 1 || separation < 0.0 || spread < 0.0) {
    throw Error(ErrorCode::InvalidParams, "blobs need >= 2 clusters of >= 2 points");
  }
  Rng rng(seed);
  const auto k = static_cast<Eigen::Index>(n_clusters);
  const auto d = static_cast<Eigen::Index>(dim);
  RowMatrix centers(k, d);

  // Rejection sampling in a box wide enough to hold the clusters; a line of
  // evenly spaced centers is the fallback and always satisfies the spacing.
  const double half_width = std::max(1.0, separation * n_clusters);
  bool placed = false;
  for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) centers(i, j) = (2.0 * uniform01(rng) - 1.0) * half_width;
    }
    placed = true;
    for (Eigen::Index a = 0; a < k && placed; ++a) {
      for (Eigen::Index b = a + 1; b < k && placed; ++b) {
        placed = (centers.row(a) - centers.row(b)).norm() >= separation;
      }
    }
  }
  if (!placed) {
    centers.setZero();
    for (Eigen::Index i = 0; i < k; ++i) centers(i, 0) = separation * static_cast<double>(i);
  }

  Dataset out;
  out.features.resize(k * per_cluster, d);
  std::vector<int> truth;
  truth.reserve(static_cast<std::size_t>(k * per_cluster));
  for (Eigen::Index i = 0; i < k; ++i) {
    for (int p = 0; p < per_cluster; ++p) {
      const Eigen::Index row = i * per_cluster + p;
      for (Eigen::Index j = 0; j < d; ++j) out.features(row, j) = centers(i, j) + spread * standard_normal(rng);
      truth.push_back(static_cast<int>(i));
    }
  }
  out.labels = truth;
  for (int j = 0; j < dim; ++j) out.attribute_names.push_back("x" + std::to_string(j));
  for (int c = 0; c < n_clusters; ++c) out.class_names.push_back("c" + std::to_string(c));
  return {std::move(out), std::move(truth)};
}

std::vector<int> geometric_class_sizes(int n, int n_classes, double imbalance) {
  std::vector<double> share(static_cast<std::size_t>(n_classes));
  double total = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    share[static_cast<std::size_t>(c)] = std::pow(imbalance, -static_cast<double>(c));
    total += share[static_cast<std::size_t>(c)];
  }
  std::vector<int> sizes(share.size());
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (std::size_t c = 0; c < share.size(); ++c) {
    const double exact = n * share[c] / total;
    sizes[c] = static_cast<int>(std::floor(exact));
    assigned += sizes[c];
    remainders.emplace_back(exact - sizes[c], static_cast<int>(c));
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; assigned < n; ++i, ++assigned) sizes[static_cast<std::size_t>(remainders[static_cast<std::size_t>(i)].second)] += 1;
  return sizes;
}

Dataset synth_sparse_noisy(const SparseNoisySpec& spec) {
  if (spec.n_samples < 2 || spec.dim < 1 || spec.n_classes < 2 || spec.sparsity < 0.0 ||
      spec.sparsity > 1.0 || spec.label_noise < 0.0 || spec.label_noise > 1.0 ||
      spec.imbalance < 1.0 || spec.n_samples < spec.n_classes) {
    throw Error(ErrorCode::InvalidParams, "sparse generator parameters out of range");
  }
  Rng rng(spec.seed);
  const auto sizes = geometric_class_sizes(spec.n_samples, spec.n_classes, spec.imbalance);
  if (std::find(sizes.begin(), sizes.end(), 0) != sizes.end()) {
    throw Error(ErrorCode::InvalidParams, "imbalance leaves a class empty");
  }

  const auto d = static_cast<Eigen::Index>(spec.dim);
  RowMatrix means(spec.n_classes, d);
  for (Eigen::Index c = 0; c < means.rows(); ++c) {
    for (Eigen::Index j = 0; j < d; ++j) means(c, j) = spec.separation * standard_normal(rng);
  }

  Dataset out;
  out.features.resize(spec.n_samples, d);
  Eigen::Index row = 0;
  for (int c = 0; c < spec.n_classes; ++c) {
    for (int i = 0; i < sizes[static_cast<std::size_t>(c)]; ++i, ++row) {
      for (Eigen::Index j = 0; j < d; ++j) out.features(row, j) = means(c, j) + standard_normal(rng);
      out.labels.push_back(c);
    }
  }

  const auto n_cells = static_cast<std::size_t>(out.features.size());
  std::vector<std::size_t> cells(n_cells);
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  shuffle(cells, rng);
  const auto n_zero = static_cast<std::size_t>(std::llround(spec.sparsity * static_cast<double>(n_cells)));
  for (std::size_t i = 0; i < n_zero; ++i) out.features.data()[cells[i]] = 0.0;

  std::vector<std::size_t> rows(out.labels.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  shuffle(rows, rng);
  const auto n_flip = static_cast<std::size_t>(std::llround(spec.label_noise * static_cast<double>(rows.size())));
  for (std::size_t i = 0; i < n_flip; ++i) {
    int& label = out.labels[rows[i]];
    const int shift = 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(spec.n_classes - 1)));
    label = (label + shift) % spec.n_classes;
  }

  for (int j = 0; j < spec.dim; ++j) out.attribute_names.push_back("g" + std::to_string(j));
  for (int c = 0; c < spec.n_classes; ++c) out.class_names.push_back("c" + std::to_string(c));
  return out;
}

}  // namespace imknn
