#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "imknn/classifier.hpp"
#include "imknn/dataset.hpp"

namespace imknn {

/// Where a benchmark dataset comes from: a CSV file (optionally with a
/// pre-partitioned test file) or a synthetic generator spec.
///
/// Synthetic specs:
///   blobs:CxNxD[:separation[:spread]]
///   sparse:NxD[:sparsity[:label_noise[:imbalance[:classes]]]]
struct DatasetSpec {
  std::string name;
  std::string path;
  std::string test_path;
  std::string synth;
  std::string label;  // column name or zero-based index; empty: last column
  bool has_header = true;
  std::uint64_t seed = 0;
};

/// Fully resolved benchmark configuration. Reports echo it verbatim.
struct RunConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<std::string> methods;
  std::size_t runs = 1000;
  std::uint64_t base_seed = 0;
  double train_fraction = 0.9;
  bool stratified = true;
  std::optional<std::size_t> k = 5;   // nullopt: elbow per split
  std::optional<double> alpha = 0.5;  // nullopt: grid search per split
  std::vector<std::size_t> k_grid = default_k_grid();
  std::vector<double> alpha_grid = default_alpha_grid();
  int folds = 5;
  ImknnParams imknn;
  double fuzzy_m = 2.0;
  std::size_t mknn_h = 0;  // 0: same as K
  std::string reference = "knn";
  std::string out_dir = ".";
  std::vector<std::string> formats = {"csv", "txt"};

  /// Throws UnknownMethod or InvalidParams.
  void validate() const;
};

const std::vector<std::string>& implemented_methods();
/// Variants named in the comparison that this library does not provide.
const std::vector<std::string>& unimplemented_methods();

/// Line-oriented `key = value` text with `[run]` and `[dataset NAME]`
/// sections. Unknown keys are rejected.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);
std::string to_config_text(const RunConfig& config);

struct LoadedDataset {
  std::string name;
  Dataset data;
  std::optional<Dataset> fixed_test;
};

LoadedDataset load_dataset(const DatasetSpec& spec);
Dataset synthesize(std::string_view synth_spec, std::uint64_t seed);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single run
};

MetricSummary summarize(const std::vector<double>& values);

struct MethodResult {
  std::string method;
  std::string dataset;
  std::vector<double> accuracy;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> k_used;
  std::vector<double> alpha_used;  // imknn only
  MetricSummary accuracy_summary;
  MetricSummary precision_summary;
  MetricSummary recall_summary;
  /// Two-sided paired Wilcoxon against the reference method; unset for the
  /// reference itself. Identical per-run values give p = 1.
  std::optional<double> p_accuracy;
  std::optional<double> p_precision;
  std::optional<double> p_recall;
};

struct EvalReport {
  RunConfig config;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> dataset_names;
  std::vector<std::string> split_modes;  // per dataset: resplit or fixed
  std::vector<MethodResult> results;
  std::vector<std::string> not_implemented;

  const MethodResult* find(std::string_view method, std::string_view dataset) const;
};

EvalReport run_benchmark(const RunConfig& config);
EvalReport run_benchmark(const RunConfig& config, const std::vector<LoadedDataset>& datasets);

/// Long format: method,dataset,metric,mean,std,n_runs after `#` config lines.
void write_report_csv(const EvalReport& report, std::ostream& out);
/// Aligned tables of percentages, two decimals, one table per metric.
void write_report_text(const EvalReport& report, std::ostream& out);

}  // namespace imknn
