#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "imknn/benchmark.hpp"
#include "imknn/error.hpp"

namespace imknn {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(',', start);
    auto item = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value) {
  throw Error(ErrorCode::InvalidParams, "bad value for '" + key + "': '" + value + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad(key, value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad(key, value);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

template <typename T>
std::string join_numbers(const std::vector<T>& items) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < items.size(); ++i) out << (i ? "," : "") << items[i];
  return out.str();
}

std::string shapley_kind_name(ShapleyKind k) {
  switch (k) {
    case ShapleyKind::Exact: return "exact";
    case ShapleyKind::MonteCarlo: return "mc";
    case ShapleyKind::Auto: break;
  }
  return "auto";
}

void set_run_key(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "runs") {
    c.runs = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    c.base_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "methods") {
    c.methods = split_list(value);
  } else if (key == "reference") {
    c.reference = value;
  } else if (key == "train_fraction") {
    c.train_fraction = parse_number<double>(key, value);
  } else if (key == "stratified") {
    c.stratified = parse_bool(key, value);
  } else if (key == "k") {
    if (value == "elbow") c.k.reset();
    else c.k = parse_number<std::size_t>(key, value);
  } else if (key == "k_grid") {
    c.k_grid.clear();
    for (const auto& v : split_list(value)) c.k_grid.push_back(parse_number<std::size_t>(key, v));
  } else if (key == "alpha") {
    if (value == "grid") c.alpha.reset();
    else c.alpha = parse_number<double>(key, value);
  } else if (key == "alpha_grid") {
    c.alpha_grid.clear();
    for (const auto& v : split_list(value)) c.alpha_grid.push_back(parse_number<double>(key, v));
  } else if (key == "folds") {
    c.folds = parse_number<int>(key, value);
  } else if (key == "bins") {
    c.imknn.bins = parse_number<int>(key, value);
  } else if (key == "shapley") {
    if (value == "auto") c.imknn.shapley.kind = ShapleyKind::Auto;
    else if (value == "exact") c.imknn.shapley.kind = ShapleyKind::Exact;
    else if (value == "mc") c.imknn.shapley.kind = ShapleyKind::MonteCarlo;
    else bad(key, value);
  } else if (key == "exact_threshold") {
    c.imknn.shapley.exact_threshold = parse_number<int>(key, value);
  } else if (key == "permutations") {
    c.imknn.shapley.permutations = parse_number<int>(key, value);
  } else if (key == "weight_biased") {
    c.imknn.shapley.weight_biased = parse_bool(key, value);
  } else if (key == "fuzzy_m") {
    c.fuzzy_m = parse_number<double>(key, value);
  } else if (key == "mknn_h") {
    c.mknn_h = parse_number<std::size_t>(key, value);
  } else if (key == "out") {
    c.out_dir = value;
  } else if (key == "formats") {
    c.formats = split_list(value);
  } else {
    throw Error(ErrorCode::InvalidParams, "unknown [run] key '" + key + "'");
  }
}

void set_dataset_key(DatasetSpec& d, const std::string& key, const std::string& value) {
  if (key == "path") d.path = value;
  else if (key == "test_path") d.test_path = value;
  else if (key == "synth") d.synth = value;
  else if (key == "label") d.label = value;
  else if (key == "header") d.has_header = parse_bool(key, value);
  else if (key == "seed") d.seed = parse_number<std::uint64_t>(key, value);
  else throw Error(ErrorCode::InvalidParams, "unknown [dataset] key '" + key + "'");
}

}  // namespace

const std::vector<std::string>& implemented_methods() {
  static const std::vector<std::string> ids = {"knn", "weighted", "fuzzy", "mknn", "ensemble", "imknn"};
  return ids;
}

const std::vector<std::string>& unimplemented_methods() {
  static const std::vector<std::string> ids = {"locally_adaptive", "generalized_mean", "mutual"};
  return ids;
}

void RunConfig::validate() const {
  auto known = [](const std::vector<std::string>& ids, const std::string& m) {
    return std::find(ids.begin(), ids.end(), m) != ids.end();
  };
  const std::string valid = join(implemented_methods());
  if (methods.empty()) throw Error(ErrorCode::InvalidParams, "no methods given; valid ids: " + valid);
  for (const auto& m : methods) {
    if (!known(implemented_methods(), m) && !known(unimplemented_methods(), m)) {
      throw Error(ErrorCode::UnknownMethod, "'" + m + "'; valid ids: " + valid);
    }
  }
  if (!known(implemented_methods(), reference)) {
    throw Error(ErrorCode::UnknownMethod, "reference '" + reference + "'; valid ids: " + valid);
  }
  if (datasets.empty()) throw Error(ErrorCode::InvalidParams, "no datasets given");
  for (const auto& d : datasets) {
    if (d.path.empty() == d.synth.empty()) {
      throw Error(ErrorCode::InvalidParams, "dataset '" + d.name + "' needs exactly one of path or synth");
    }
  }
  if (runs < 1) throw Error(ErrorCode::InvalidParams, "runs must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidParams, "train_fraction must lie in (0,1)");
  }
  if (k && *k == 0) throw Error(ErrorCode::InvalidParams, "k must be >= 1");
  if (!k && (k_grid.empty() || std::count(k_grid.begin(), k_grid.end(), std::size_t{0}) > 0)) {
    throw Error(ErrorCode::InvalidParams, "k_grid must be nonempty with K >= 1");
  }
  if (alpha && !(*alpha >= 0.0 && *alpha <= 1.0)) throw Error(ErrorCode::InvalidParams, "alpha must lie in [0,1]");
  if (!alpha) {
    if (alpha_grid.empty()) throw Error(ErrorCode::InvalidParams, "alpha_grid must be nonempty");
    for (const double a : alpha_grid) {
      if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorCode::InvalidParams, "alpha_grid outside [0,1]");
    }
  }
  if (folds < 2) throw Error(ErrorCode::InvalidParams, "folds must be >= 2");
  if (imknn.bins < 2) throw Error(ErrorCode::InvalidParams, "bins must be >= 2");
  if (imknn.shapley.permutations < 1) throw Error(ErrorCode::InvalidParams, "permutations must be >= 1");
  if (!(fuzzy_m > 1.0)) throw Error(ErrorCode::InvalidParams, "fuzzy_m must exceed 1");
  for (const auto& f : formats) {
    if (f != "csv" && f != "txt") throw Error(ErrorCode::InvalidParams, "unknown report format '" + f + "'");
  }
}

RunConfig parse_config(std::istream& in) {
  RunConfig c;
  enum class Section { Run, Dataset } section = Section::Run;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw Error(ErrorCode::ParseError, "config line " + std::to_string(line_no));
      const auto header = trim(std::string_view(text).substr(1, text.size() - 2));
      if (header == "run") {
        section = Section::Run;
      } else if (header.rfind("dataset", 0) == 0) {
        section = Section::Dataset;
        DatasetSpec d;
        d.name = trim(std::string_view(header).substr(7));
        c.datasets.push_back(std::move(d));
      } else {
        throw Error(ErrorCode::ParseError, "unknown section [" + header + "]");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(std::string_view(text).substr(0, eq));
    const auto value = trim(std::string_view(text).substr(eq + 1));
    if (section == Section::Run) set_run_key(c, key, value);
    else set_dataset_key(c.datasets.back(), key, value);
  }
  for (std::size_t i = 0; i < c.datasets.size(); ++i) {
    auto& d = c.datasets[i];
    if (d.name.empty()) {
      d.name = !d.path.empty() ? std::filesystem::path(d.path).stem().string() : "dataset" + std::to_string(i);
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  return parse_config(in);
}

std::string to_config_text(const RunConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "[run]\n"
      << "runs = " << c.runs << '\n'
      << "seed = " << c.base_seed << '\n'
      << "methods = " << join(c.methods) << '\n'
      << "reference = " << c.reference << '\n'
      << "train_fraction = " << c.train_fraction << '\n'
      << "stratified = " << (c.stratified ? "true" : "false") << '\n';
  if (c.k) out << "k = " << *c.k << '\n';
  else out << "k = elbow\n";
  out << "k_grid = " << join_numbers(c.k_grid) << '\n';
  if (c.alpha) out << "alpha = " << *c.alpha << '\n';
  else out << "alpha = grid\n";
  out << "alpha_grid = " << join_numbers(c.alpha_grid) << '\n'
      << "folds = " << c.folds << '\n'
      << "bins = " << c.imknn.bins << '\n'
      << "shapley = " << shapley_kind_name(c.imknn.shapley.kind) << '\n'
      << "exact_threshold = " << c.imknn.shapley.exact_threshold << '\n'
      << "permutations = " << c.imknn.shapley.permutations << '\n'
      << "weight_biased = " << (c.imknn.shapley.weight_biased ? "true" : "false") << '\n'
      << "fuzzy_m = " << c.fuzzy_m << '\n'
      << "mknn_h = " << c.mknn_h << '\n'
      << "out = " << c.out_dir << '\n'
      << "formats = " << join(c.formats) << '\n';
  for (const auto& d : c.datasets) {
    out << "\n[dataset " << d.name << "]\n";
    if (!d.path.empty()) out << "path = " << d.path << '\n';
    if (!d.test_path.empty()) out << "test_path = " << d.test_path << '\n';
    if (!d.synth.empty()) out << "synth = " << d.synth << '\n';
    if (!d.label.empty()) out << "label = " << d.label << '\n';
    out << "header = " << (d.has_header ? "true" : "false") << '\n'
        << "seed = " << d.seed << '\n';
  }
  return out.str();
}

}  // namespace imknn
