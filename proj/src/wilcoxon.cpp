#include "imknn/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "imknn/error.hpp"

namespace imknn {

namespace {

constexpr double kZero = 1e-12;

bool tied(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

double clamp_p(double p) { return std::clamp(p, std::numeric_limits<double>::min(), 1.0); }

}  // namespace

std::vector<double> signed_rank_magnitudes(std::span<const double> abs_diffs) {
  const std::size_t n = abs_diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return abs_diffs[i] < abs_diffs[j]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && tied(abs_diffs[order[i]], abs_diffs[order[j]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (std::abs(d) > kZero) diffs.push_back(d);
  }
  if (diffs.empty()) throw Error(ErrorCode::AllZeroDifferences, "all paired differences are zero");

  std::vector<double> mags(diffs.size());
  std::transform(diffs.begin(), diffs.end(), mags.begin(), [](double d) { return std::abs(d); });
  const auto ranks = signed_rank_magnitudes(mags);

  WilcoxonResult r;
  r.n = diffs.size();
  for (std::size_t i = 0; i < diffs.size(); ++i) (diffs[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];

  r.exact = method == WilcoxonMethod::Exact ||
            (method == WilcoxonMethod::Auto && r.n <= kWilcoxonExactLimit);
  if (r.exact) {
    // Null distribution of W+ over all 2^n sign patterns, on doubled ranks
    // so that half-integer average ranks stay integral.
    std::vector<int> doubled(r.n);
    int total = 0;
    for (std::size_t i = 0; i < r.n; ++i) {
      doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
      total += doubled[i];
    }
    std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
    counts[0] = 1.0;
    int reach = 0;
    for (const int d : doubled) {
      for (int s = reach; s >= 0; --s) counts[static_cast<std::size_t>(s + d)] += counts[static_cast<std::size_t>(s)];
      reach += d;
    }
    const auto observed = static_cast<int>(std::lround(2.0 * r.w_plus));
    const double all = std::ldexp(1.0, static_cast<int>(r.n));
    double lower = 0.0;
    double upper = 0.0;
    for (int s = 0; s <= total; ++s) {
      if (s <= observed) lower += counts[static_cast<std::size_t>(s)];
      if (s >= observed) upper += counts[static_cast<std::size_t>(s)];
    }
    r.p_value = clamp_p(2.0 * std::min(lower, upper) / all);
    return r;
  }

  const double n = static_cast<double>(r.n);
  const double mean = n * (n + 1.0) / 4.0;
  double tie_term = 0.0;
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  const double z = std::max(0.0, std::abs(r.w_plus - mean) - 0.5) / std::sqrt(var);
  r.p_value = clamp_p(std::erfc(z / std::sqrt(2.0)));
  return r;
}

}  // namespace imknn
