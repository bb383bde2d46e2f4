// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace kgtool {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Two-sided standard-normal critical value for a confidence level in (0, 1).
double z_for_confidence(double confidence);

/// Wilson score interval for a binomial proportion, as fractions in [0, 1].
/// Throws UsageError when n == 0, successes > n, or confidence is outside (0, 1).
Interval wilson_ci(std::size_t successes, std::size_t n, double confidence = 0.95);

/// McNemar test on the discordant counts b and c. Uses the two-sided exact
/// binomial (p = 1/2) when b + c < 25, otherwise the continuity-corrected
/// chi-square (|b - c| - 1)^2 / (b + c) with one degree of freedom.
/// Returns 1 when there are no discordant pairs.
double mcnemar_p(std::size_t b, std::size_t c);

struct SampleCount {
  std::size_t correct = 0;
  std::size_t samples = 0;
};

/// Unbiased pass@k, averaged over questions: 1 - C(n - c, k) / C(n, k).
/// Throws UsageError on an empty list, k == 0, k > n, or c > n.
double pass_at_k(std::span<const SampleCount> per_question, std::size_t k);

/// Ranks with ties sharing their average rank (1-based).
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation (Pearson correlation of average ranks). Throws
/// UsageError on a length mismatch or fewer than 2 points. NaN when either
/// side is constant.
double spearman_rho(std::span<const double> xs, std::span<const double> ys);

}  // namespace kgtool
