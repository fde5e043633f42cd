// imknn: benchmark runner, validity sweeps and single predictions.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imknn/benchmark.hpp"
#include "imknn/classifier.hpp"
#include "imknn/error.hpp"
#include "imknn/validity.hpp"

namespace fs = std::filesystem;
using namespace imknn;

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

bool is_usage_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownMethod:
    case ErrorCode::UnknownDataset:
    case ErrorCode::UnknownMetric:
    case ErrorCode::InvalidParams:
    case ErrorCode::InvalidRange:
    case ErrorCode::InvalidK:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::ParseError:
    case ErrorCode::FileNotFound:
      return true;
    default:
      return false;
  }
}

std::string default_out_dir() {
  const char* env = std::getenv("IMKNN_OUT_DIR");
  return env && *env ? env : ".";
}

double parse_real(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ParseError, what + ": '" + text + "' is not a number");
  }
  return v;
}

std::vector<double> parse_query(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  for (std::string field; std::getline(in, field, ',');) {
    const auto b = field.find_first_not_of(' ');
    const auto e = field.find_last_not_of(' ');
    out.push_back(parse_real(b == std::string::npos ? "" : field.substr(b, e - b + 1), "query"));
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "empty query");
  return out;
}

/// "A..B" inclusive.
std::vector<int> parse_nc_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw Error(ErrorCode::InvalidRange, "expected A..B, got '" + text + "'");
  int lo = 0;
  int hi = 0;
  const std::string a = text.substr(0, dots);
  const std::string b = text.substr(dots + 2);
  const auto ra = std::from_chars(a.data(), a.data() + a.size(), lo);
  const auto rb = std::from_chars(b.data(), b.data() + b.size(), hi);
  if (a.empty() || b.empty() || ra.ec != std::errc() || rb.ec != std::errc() ||
      ra.ptr != a.data() + a.size() || rb.ptr != b.data() + b.size() || lo > hi) {
    throw Error(ErrorCode::InvalidRange, "malformed cluster-count range '" + text + "'");
  }
  std::vector<int> out;
  for (int n = lo; n <= hi; ++n) out.push_back(n);
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
  out << content;
}

LabelColumn label_column(const std::string& label) {
  if (label.empty()) return kLastColumn;
  if (std::all_of(label.begin(), label.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return static_cast<std::size_t>(std::stoull(label));
  }
  return label;
}

struct BenchArgs {
  std::string config;
  std::vector<std::string> data;
  std::vector<std::string> synth;
  std::string label;
  bool no_header = false;
  std::string methods;
  std::size_t runs = 0;
  std::uint64_t seed = 0;
  std::string k;
  std::string alpha;
  std::string out;
  int folds = 0;
  int bins = 0;
  bool no_stratify = false;
  std::string reference;
};

int cmd_bench(const BenchArgs& a, const CLI::App& sub) {
  RunConfig c;
  if (!a.config.empty()) c = load_config(a.config);
  else c.methods = {"knn", "imknn"};
  if (sub.count("--out") == 0 && c.out_dir == ".") c.out_dir = default_out_dir();

  if (!a.data.empty() || !a.synth.empty()) c.datasets.clear();
  for (const auto& path : a.data) {
    DatasetSpec d;
    d.name = fs::path(path).stem().string();
    d.path = path;
    d.label = a.label;
    d.has_header = !a.no_header;
    c.datasets.push_back(d);
  }
  for (const auto& spec : a.synth) {
    DatasetSpec d;
    d.name = spec;
    d.synth = spec;
    d.seed = a.seed;
    c.datasets.push_back(d);
  }
  if (sub.count("--methods")) {
    c.methods.clear();
    std::stringstream in(a.methods);
    for (std::string m; std::getline(in, m, ',');) {
      if (!m.empty()) c.methods.push_back(m);
    }
  }
  if (sub.count("--runs")) c.runs = a.runs;
  if (sub.count("--seed")) c.base_seed = a.seed;
  if (sub.count("--k")) {
    if (a.k == "elbow") c.k.reset();
    else c.k = static_cast<std::size_t>(parse_real(a.k, "--k"));
  }
  if (sub.count("--alpha")) {
    if (a.alpha == "grid") c.alpha.reset();
    else c.alpha = parse_real(a.alpha, "--alpha");
  }
  if (sub.count("--out")) c.out_dir = a.out;
  if (sub.count("--folds")) c.folds = a.folds;
  if (sub.count("--bins")) c.imknn.bins = a.bins;
  if (a.no_stratify) c.stratified = false;
  if (sub.count("--reference")) c.reference = a.reference;

  c.validate();
  const EvalReport report = run_benchmark(c);
  const fs::path dir = c.out_dir;
  for (const auto& f : c.formats) {
    std::ostringstream body;
    if (f == "csv") write_report_csv(report, body);
    else write_report_text(report, body);
    write_file(dir / ("report." + f), body.str());
  }
  write_report_text(report, std::cout);
  return 0;
}

struct ValidityArgs {
  std::string synth;
  std::string data;
  std::string label;
  bool no_header = false;
  std::string nc = "2..6";
  std::uint64_t seed = 0;
  int trials = 10;
  int true_nc = 0;
  std::string out;
};

int cmd_validity(const ValidityArgs& a) {
  if (a.synth.empty() == a.data.empty()) {
    throw Error(ErrorCode::InvalidParams, "give exactly one of --synth or --data");
  }
  const auto candidates = parse_nc_range(a.nc);
  RowMatrix points;
  std::optional<int> true_n;
  if (a.true_nc > 0) true_n = a.true_nc;
  if (!a.synth.empty()) {
    const Dataset d = synthesize(a.synth, a.seed);
    points = d.features;
    if (!true_n && a.synth.rfind("blobs:", 0) == 0) true_n = d.n_classes();
  } else {
    const Dataset d = load_csv(a.data, label_column(a.label), !a.no_header);
    points = d.features;
  }
  const SweepResult sweep = nc_sweep(points, candidates, true_n, a.seed, a.trials);

  std::ostringstream body;
  body << "# source = " << (a.synth.empty() ? a.data : a.synth) << '\n'
       << "# nc = " << a.nc << '\n'
       << "# seed = " << a.seed << '\n'
       << "# trials = " << a.trials << '\n';
  if (true_n) body << "# true_nc = " << *true_n << '\n';
  write_sweep_csv(sweep, body);

  const fs::path path = (a.out.empty() ? fs::path(default_out_dir()) : fs::path(a.out)) / "sweep.csv";
  write_file(path, body.str());
  std::cout << body.str();
  std::cout << "argmin n = " << sweep.argmin_n;
  if (true_n) std::cout << (sweep.min_at_true_n ? " (true NC)" : " (true NC is " + std::to_string(*true_n) + ")");
  std::cout << '\n';
  return 0;
}

struct PredictArgs {
  std::string train;
  std::string label;
  bool no_header = false;
  std::string query;
  std::string k = "5";
  std::string alpha = "0.5";
  int bins = 8;
  std::uint64_t seed = 0;
};

int cmd_predict(const PredictArgs& a) {
  const auto raw = parse_query(a.query);
  const Dataset train = load_csv(a.train, label_column(a.label), !a.no_header);
  if (raw.size() != train.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "query has " + std::to_string(raw.size()) + " values, training data has " +
                    std::to_string(train.dim()) + " features");
  }
  const auto scaler = fit_standardizer(train);
  const Dataset train_std = apply_standardizer(scaler, train);

  Dataset q;
  q.features = RowMatrix(1, static_cast<Eigen::Index>(raw.size()));
  for (std::size_t j = 0; j < raw.size(); ++j) q.features(0, static_cast<Eigen::Index>(j)) = raw[j];
  q.labels = {0};
  q.attribute_names = train.attribute_names;
  q.class_names = train.class_names;
  const Dataset q_std = apply_standardizer(scaler, q);

  ImknnConfig config;
  config.seed = a.seed;
  config.params.bins = a.bins;
  if (a.k == "elbow") config.k.reset();
  else config.k = static_cast<std::size_t>(parse_real(a.k, "--k"));
  if (a.alpha == "grid") config.alpha.reset();
  else config.alpha = parse_real(a.alpha, "--alpha");
  if (config.k && *config.k == 0) throw Error(ErrorCode::InvalidK, "K must be >= 1");
  if (config.alpha && !(*config.alpha >= 0.0 && *config.alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "alpha must lie in [0,1]");
  }

  const ImknnModel model = fit(train_std, config);
  const Prediction p = predict_one(model, q_std.features.row(0).transpose());

  std::cout << "label: " << train.class_names[static_cast<std::size_t>(p.label)] << '\n' << "scores:";
  for (int c = 0; c < train.n_classes(); ++c) {
    std::cout << ' ' << train.class_names[static_cast<std::size_t>(c)] << '=' << std::setprecision(6)
              << p.scores(c);
  }
  std::cout << '\n'
            << "k: " << model.k << (model.k_from_elbow ? " (elbow)" : "") << '\n'
            << "alpha: " << model.alpha << (model.alpha_from_grid ? " (grid)" : "") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information-modified KNN: benchmarks, validity sweeps, predictions"};
  app.require_subcommand(1);

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Repeated-resplit benchmark; writes report.csv and report.txt");
  b->add_option("--config", bench.config, "Config file ([run] and [dataset NAME] sections)");
  b->add_option("--data", bench.data, "CSV dataset (repeatable)");
  b->add_option("--synth", bench.synth, "Synthetic dataset spec (repeatable)");
  b->add_option("--label", bench.label, "Label column name or index (default: last)");
  b->add_flag("--no-header", bench.no_header, "CSV files have no header row");
  b->add_option("--methods", bench.methods, "Comma-separated method ids");
  b->add_option("--runs", bench.runs, "Number of resplits");
  b->add_option("--seed", bench.seed, "Base seed");
  b->add_option("--k", bench.k, "K or 'elbow'");
  b->add_option("--alpha", bench.alpha, "Blend weight or 'grid'");
  b->add_option("--out", bench.out, "Output directory (default: $IMKNN_OUT_DIR or .)");
  b->add_option("--folds", bench.folds, "Cross-validation folds for K and alpha selection");
  b->add_option("--bins", bench.bins, "Quantization bins for NMI");
  b->add_flag("--no-stratify", bench.no_stratify, "Plain random splits");
  b->add_option("--reference", bench.reference, "Reference method for p-values");

  ValidityArgs validity;
  auto* v = app.add_subcommand("validity", "Cluster-count sweep of the validity index; writes sweep.csv");
  v->add_option("--synth", validity.synth, "Synthetic spec, e.g. blobs:3x50x2");
  v->add_option("--data", validity.data, "CSV dataset");
  v->add_option("--label", validity.label, "Label column to drop (default: last)");
  v->add_flag("--no-header", validity.no_header, "CSV has no header row");
  v->add_option("--nc", validity.nc, "Cluster counts A..B")->capture_default_str();
  v->add_option("--seed", validity.seed, "Seed");
  v->add_option("--trials", validity.trials, "k-means restarts per count")->capture_default_str();
  v->add_option("--true-nc", validity.true_nc, "Known cluster count");
  v->add_option("--out", validity.out, "Output directory (default: $IMKNN_OUT_DIR or .)");

  PredictArgs predict;
  auto* p = app.add_subcommand("predict", "Classify one query against a training file");
  p->add_option("--train", predict.train, "Training CSV")->required();
  p->add_option("--label", predict.label, "Label column name or index (default: last)");
  p->add_flag("--no-header", predict.no_header, "CSV has no header row");
  p->add_option("--query", predict.query, "Comma-separated feature values")->required();
  p->add_option("--k", predict.k, "K or 'elbow'")->capture_default_str();
  p->add_option("--alpha", predict.alpha, "Blend weight or 'grid'")->capture_default_str();
  p->add_option("--bins", predict.bins, "Quantization bins for NMI")->capture_default_str();
  p->add_option("--seed", predict.seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*b) return cmd_bench(bench, *b);
    if (*v) return cmd_validity(validity);
    return cmd_predict(predict);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_usage_error(e.code()) ? kUsageError : kRuntimeFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}
