#include "imknn/benchmark.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "imknn/baselines.hpp"
#include "imknn/error.hpp"
#include "imknn/metrics.hpp"
#include "imknn/random.hpp"
#include "imknn/wilcoxon.hpp"

namespace imknn {

namespace {

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

template <typename T>
T synth_number(std::string_view spec, const std::string& field) {
  T out{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ParseError, "synthetic spec '" + std::string(spec) + "': bad field '" + field + "'");
  }
  return out;
}

bool is_index(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string format_real(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

std::optional<double> paired_p(const std::vector<double>& a, const std::vector<double>& b) {
  try {
    return wilcoxon_signed_rank(a, b).p_value;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AllZeroDifferences) return 1.0;
    throw;
  }
}

bool contains(const std::vector<std::string>& items, const std::string& s) {
  return std::find(items.begin(), items.end(), s) != items.end();
}

struct RunScores {
  double accuracy, precision, recall;
};

RunScores score(const Dataset& test, const std::vector<int>& predicted, int n_classes) {
  const auto m = metrics(test.labels, predicted, n_classes);
  return {m.accuracy, m.macro_precision, m.macro_recall};
}

}  // namespace

Dataset synthesize(std::string_view synth_spec, std::uint64_t seed) {
  const auto parts = split_on(synth_spec, ':');
  if (parts.size() < 2) {
    throw Error(ErrorCode::ParseError, "synthetic spec '" + std::string(synth_spec) + "' needs KIND:SHAPE");
  }
  const auto shape = split_on(parts[1], 'x');
  if (parts[0] == "blobs") {
    if (shape.size() != 3 || parts.size() > 4) {
      throw Error(ErrorCode::ParseError, "expected blobs:CxNxD[:separation[:spread]]");
    }
    const double separation = parts.size() > 2 ? synth_number<double>(synth_spec, parts[2]) : 10.0;
    const double spread = parts.size() > 3 ? synth_number<double>(synth_spec, parts[3]) : 1.0;
    return synth_blobs(synth_number<int>(synth_spec, shape[0]), synth_number<int>(synth_spec, shape[1]),
                       synth_number<int>(synth_spec, shape[2]), separation, spread, seed)
        .first;
  }
  if (parts[0] == "sparse") {
    if (shape.size() != 2 || parts.size() > 6) {
      throw Error(ErrorCode::ParseError, "expected sparse:NxD[:sparsity[:noise[:imbalance[:classes]]]]");
    }
    SparseNoisySpec s;
    s.n_samples = synth_number<int>(synth_spec, shape[0]);
    s.dim = synth_number<int>(synth_spec, shape[1]);
    if (parts.size() > 2) s.sparsity = synth_number<double>(synth_spec, parts[2]);
    if (parts.size() > 3) s.label_noise = synth_number<double>(synth_spec, parts[3]);
    if (parts.size() > 4) s.imbalance = synth_number<double>(synth_spec, parts[4]);
    if (parts.size() > 5) s.n_classes = synth_number<int>(synth_spec, parts[5]);
    s.seed = seed;
    return synth_sparse_noisy(s);
  }
  throw Error(ErrorCode::UnknownDataset, "unknown synthetic kind '" + parts[0] + "'");
}

LoadedDataset load_dataset(const DatasetSpec& spec) {
  LoadedDataset out;
  out.name = spec.name;
  if (!spec.synth.empty()) {
    out.data = synthesize(spec.synth, spec.seed);
    return out;
  }
  if (spec.path.empty()) throw Error(ErrorCode::UnknownDataset, "dataset '" + spec.name + "' has no source");
  LabelColumn label = kLastColumn;
  if (!spec.label.empty()) {
    if (is_index(spec.label)) label = static_cast<std::size_t>(std::stoull(spec.label));
    else label = spec.label;
  }
  out.data = load_csv(spec.path, label, spec.has_header);
  if (!spec.test_path.empty()) {
    auto test = load_csv(spec.test_path, label, spec.has_header);
    if (test.dim() != out.data.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "test file of '" + spec.name + "' has a different width");
    }
    // Re-encode test labels against the training class list.
    for (auto& y : test.labels) {
      const auto& name = test.class_names[static_cast<std::size_t>(y)];
      const auto it = std::find(out.data.class_names.begin(), out.data.class_names.end(), name);
      if (it == out.data.class_names.end()) {
        throw Error(ErrorCode::LabelOutOfRange, "test class '" + name + "' absent from training file");
      }
      y = static_cast<int>(it - out.data.class_names.begin());
    }
    test.class_names = out.data.class_names;
    out.fixed_test = std::move(test);
  }
  return out;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

const MethodResult* EvalReport::find(std::string_view method, std::string_view dataset) const {
  for (const auto& r : results) {
    if (r.method == method && r.dataset == dataset) return &r;
  }
  return nullptr;
}

EvalReport run_benchmark(const RunConfig& config) {
  config.validate();
  std::vector<LoadedDataset> loaded;
  loaded.reserve(config.datasets.size());
  for (const auto& spec : config.datasets) loaded.push_back(load_dataset(spec));
  return run_benchmark(config, loaded);
}

EvalReport run_benchmark(const RunConfig& config, const std::vector<LoadedDataset>& datasets) {
  config.validate();
  EvalReport report;
  report.config = config;
  for (std::size_t r = 0; r < config.runs; ++r) report.seeds.push_back(config.base_seed + r);

  std::vector<std::string> methods;
  for (const auto& m : config.methods) {
    if (contains(unimplemented_methods(), m)) {
      if (!contains(report.not_implemented, m)) report.not_implemented.push_back(m);
    } else if (!contains(methods, m)) {
      methods.push_back(m);
    }
  }
  // The reference always runs so that p-values have a baseline.
  if (!contains(methods, config.reference)) methods.insert(methods.begin(), config.reference);

  ImknnParams params = config.imknn;

  for (const auto& ds : datasets) {
    ds.data.validate();
    report.dataset_names.push_back(ds.name);
    report.split_modes.push_back(ds.fixed_test ? "fixed" : "resplit");
    const int n_classes = ds.data.n_classes();

    std::vector<MethodResult> rows(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
      rows[m].method = methods[m];
      rows[m].dataset = ds.name;
    }

    for (std::size_t r = 0; r < config.runs; ++r) {
      const std::uint64_t seed = report.seeds[r];
      Dataset train;
      Dataset test;
      if (ds.fixed_test) {
        train = ds.data;
        test = *ds.fixed_test;
      } else {
        std::tie(train, test) = split(ds.data, {config.train_fraction, seed, config.stratified});
      }
      const auto scaler = fit_standardizer(train);
      train = apply_standardizer(scaler, train);
      test = apply_standardizer(scaler, test);

      const std::size_t k = config.k ? *config.k
                                     : select_k_elbow(train, config.k_grid, config.folds, derive_seed(seed, 1));
      const NeighborIndex index = fit_index(train, Metric::Euclidean);
      const std::size_t q = test.size();

      for (std::size_t m = 0; m < methods.size(); ++m) {
        const auto& id = methods[m];
        std::vector<int> predicted(q);
        double alpha_used = std::nan("");
        if (id == "imknn") {
          ImknnModel model;
          model.index = index;
          model.k = k;
          model.alpha = config.alpha ? *config.alpha
                                     : select_alpha(train, k, config.alpha_grid, config.folds,
                                                    derive_seed(seed, 2), params);
          model.params = params;
          model.seed = seed;
          model.k_from_elbow = !config.k;
          model.alpha_from_grid = !config.alpha;
          alpha_used = model.alpha;
          for (std::size_t i = 0; i < q; ++i) {
            predicted[i] = predict_one(model, test.features.row(static_cast<Eigen::Index>(i)).transpose(), i).label;
          }
        } else {
          const Variant v = parse_variant(id);
          std::optional<MknnModel> mknn;
          if (v == Variant::Mknn) mknn.emplace(index, config.mknn_h == 0 ? k : config.mknn_h);
          for (std::size_t i = 0; i < q; ++i) {
            const Eigen::VectorXd x = test.features.row(static_cast<Eigen::Index>(i)).transpose();
            switch (v) {
              case Variant::Traditional: predicted[i] = knn_predict(index, x, k); break;
              case Variant::Weighted: predicted[i] = weighted_knn_predict(index, x, k); break;
              case Variant::Fuzzy: predicted[i] = fuzzy_knn_predict(index, x, k, config.fuzzy_m).label; break;
              case Variant::Mknn: predicted[i] = mknn->predict(x, k); break;
              case Variant::Ensemble: predicted[i] = ensemble_knn_predict(index, x); break;
            }
          }
        }
        const auto s = score(test, predicted, n_classes);
        rows[m].accuracy.push_back(s.accuracy);
        rows[m].precision.push_back(s.precision);
        rows[m].recall.push_back(s.recall);
        rows[m].k_used.push_back(static_cast<double>(id == "ensemble" ? ensemble_k_max(train.size()) : k));
        if (id == "imknn") rows[m].alpha_used.push_back(alpha_used);
      }
    }

    const auto ref = static_cast<std::size_t>(
        std::find(methods.begin(), methods.end(), config.reference) - methods.begin());
    for (std::size_t m = 0; m < methods.size(); ++m) {
      auto& row = rows[m];
      row.accuracy_summary = summarize(row.accuracy);
      row.precision_summary = summarize(row.precision);
      row.recall_summary = summarize(row.recall);
      if (m != ref) {
        row.p_accuracy = paired_p(row.accuracy, rows[ref].accuracy);
        row.p_precision = paired_p(row.precision, rows[ref].precision);
        row.p_recall = paired_p(row.recall, rows[ref].recall);
      }
    }
    for (auto& row : rows) report.results.push_back(std::move(row));
  }
  return report;
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
  const auto& c = report.config;
  std::istringstream config_text(to_config_text(c));
  for (std::string line; std::getline(config_text, line);) {
    if (!line.empty()) out << "# " << line << '\n';
  }
  out << "# averaging = macro over classes present in truth or prediction\n";
  out << "# k_mode = " << (c.k ? "fixed" : "elbow per split") << '\n';
  out << "# alpha_mode = " << (c.alpha ? "fixed" : "grid per split") << '\n';
  out << "# seeds = " << c.base_seed << ".." << c.base_seed + c.runs - 1 << '\n';
  for (std::size_t d = 0; d < report.dataset_names.size(); ++d) {
    out << "# split " << report.dataset_names[d] << " = " << report.split_modes[d] << '\n';
  }
  for (const auto& m : report.not_implemented) out << "# not implemented = " << m << '\n';

  out << "method,dataset,metric,mean,std,n_runs\n";
  auto row = [&](const MethodResult& r, std::string_view metric, const MetricSummary& s, std::size_t n) {
    out << r.method << ',' << r.dataset << ',' << metric << ',' << format_real(s.mean) << ','
        << format_real(s.std) << ',' << n << '\n';
  };
  for (const auto& r : report.results) {
    const std::size_t n = r.accuracy.size();
    row(r, "accuracy", r.accuracy_summary, n);
    row(r, "precision", r.precision_summary, n);
    row(r, "recall", r.recall_summary, n);
    if (r.p_accuracy) row(r, "p_accuracy", {*r.p_accuracy, 0.0}, n);
    if (r.p_precision) row(r, "p_precision", {*r.p_precision, 0.0}, n);
    if (r.p_recall) row(r, "p_recall", {*r.p_recall, 0.0}, n);
    row(r, "k", summarize(r.k_used), n);
    if (!r.alpha_used.empty()) row(r, "alpha", summarize(r.alpha_used), n);
  }
}

void write_report_text(const EvalReport& report, std::ostream& out) {
  const auto& c = report.config;
  std::vector<std::string> methods;
  for (const auto& r : report.results) {
    if (!contains(methods, r.method)) methods.push_back(r.method);
  }
  std::size_t name_width = 8;
  for (const auto& d : report.dataset_names) name_width = std::max(name_width, d.size() + 2);
  std::size_t col_width = 10;
  for (const auto& m : methods) col_width = std::max(col_width, m.size() + 2);

  out << "runs " << c.runs << ", seeds " << c.base_seed << ".." << c.base_seed + c.runs - 1
      << ", K " << (c.k ? std::to_string(*c.k) : std::string("elbow")) << ", alpha "
      << (c.alpha ? format_real(*c.alpha) : std::string("grid")) << ", reference " << c.reference
      << ", macro-averaged precision and recall\n";

  auto header = [&](std::string_view title) {
    out << '\n' << title << '\n' << std::left << std::setw(static_cast<int>(name_width)) << "Dataset";
    for (const auto& m : methods) out << std::right << std::setw(static_cast<int>(col_width)) << m;
    out << '\n';
  };
  auto table = [&](std::string_view title, auto pick) {
    header(title);
    std::vector<double> totals(methods.size(), 0.0);
    out << std::fixed << std::setprecision(2);
    for (const auto& d : report.dataset_names) {
      out << std::left << std::setw(static_cast<int>(name_width)) << d;
      for (std::size_t m = 0; m < methods.size(); ++m) {
        const auto* r = report.find(methods[m], d);
        const double v = r ? 100.0 * pick(*r).mean : 0.0;
        totals[m] += v;
        out << std::right << std::setw(static_cast<int>(col_width)) << v;
      }
      out << '\n';
    }
    out << std::left << std::setw(static_cast<int>(name_width)) << "Average";
    const double n = static_cast<double>(std::max<std::size_t>(1, report.dataset_names.size()));
    for (const double t : totals) out << std::right << std::setw(static_cast<int>(col_width)) << t / n;
    out << '\n';
    out.unsetf(std::ios::floatfield);
  };
  table("Accuracy (%)", [](const MethodResult& r) { return r.accuracy_summary; });
  table("Precision (%)", [](const MethodResult& r) { return r.precision_summary; });
  table("Recall (%)", [](const MethodResult& r) { return r.recall_summary; });

  header("Wilcoxon p-value vs " + c.reference + " (accuracy)");
  for (const auto& d : report.dataset_names) {
    out << std::left << std::setw(static_cast<int>(name_width)) << d;
    for (const auto& m : methods) {
      const auto* r = report.find(m, d);
      std::ostringstream cell;
      if (r && r->p_accuracy) cell << std::setprecision(3) << *r->p_accuracy;
      else cell << "-";
      out << std::right << std::setw(static_cast<int>(col_width)) << cell.str();
    }
    out << '\n';
  }
  for (const auto& m : report.not_implemented) out << '\n' << m << ": not implemented";
  if (!report.not_implemented.empty()) out << '\n';
  out << std::setprecision(6);
}

}  // namespace imknn
