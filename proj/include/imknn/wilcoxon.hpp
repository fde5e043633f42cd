#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace imknn {

enum class WilcoxonMethod { Auto, Exact, Normal };

struct WilcoxonResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;  // nonzero differences
  bool exact = true;
};

/// Largest nonzero-difference count handled by exact enumeration in Auto mode.
inline constexpr std::size_t kWilcoxonExactLimit = 25;

/// Two-sided paired signed-rank test. Zero differences are dropped and tied
/// magnitudes get average ranks. Auto enumerates the exact null for n <= 25
/// and uses the tie- and continuity-corrected normal approximation above.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method = WilcoxonMethod::Auto);

/// Average ranks (1-based) of |d|, with near-equal magnitudes tied.
std::vector<double> signed_rank_magnitudes(std::span<const double> abs_diffs);

}  // namespace imknn
