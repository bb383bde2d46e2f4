// SPDX-License-Identifier: Apache-2.0
#include "kgtool/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "kgtool/error.hpp"

namespace kgtool {

double z_for_confidence(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0))
    throw UsageError("confidence level must lie in (0, 1)");
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 0.5 + confidence / 2.0);
}

Interval wilson_ci(std::size_t successes, std::size_t n, double confidence) {
  if (n == 0) throw UsageError("wilson_ci: n must be positive");
  if (successes > n) throw UsageError("wilson_ci: successes exceed n");
  const double z = z_for_confidence(confidence);
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  Interval ci{centre - half, centre + half};
  // Exact at the boundaries; the closed form leaves rounding residue there.
  if (successes == 0) ci.low = 0.0;
  if (successes == n) ci.high = 1.0;
  ci.low = std::clamp(ci.low, 0.0, 1.0);
  ci.high = std::clamp(ci.high, 0.0, 1.0);
  return ci;
}

double mcnemar_p(std::size_t b, std::size_t c) {
  const std::size_t n = b + c;
  if (n == 0) return 1.0;
  if (n < 25) {
    // Two-sided exact binomial: double the smaller tail.
    const std::size_t k = std::min(b, c);
    double tail = 0.0;
    double coeff = 1.0;  // C(n, i)
    for (std::size_t i = 0; i <= k; ++i) {
      if (i > 0) coeff = coeff * static_cast<double>(n - i + 1) / static_cast<double>(i);
      tail += coeff;
    }
    tail = std::ldexp(tail, -static_cast<int>(n));
    return std::min(1.0, 2.0 * tail);
  }
  const double diff = std::fabs(static_cast<double>(b) - static_cast<double>(c)) - 1.0;
  const double chi2 = diff * diff / static_cast<double>(n);
  // Survival function of chi-square with one degree of freedom.
  return std::erfc(std::sqrt(chi2 / 2.0));
}

double pass_at_k(std::span<const SampleCount> per_question, std::size_t k) {
  if (per_question.empty()) throw UsageError("pass_at_k: no questions");
  if (k == 0) throw UsageError("pass_at_k: k must be positive");
  double sum = 0.0;
  for (const auto& q : per_question) {
    if (k > q.samples) throw UsageError("pass_at_k: k exceeds the sample count");
    if (q.correct > q.samples) throw UsageError("pass_at_k: correct exceeds the sample count");
    const std::size_t wrong = q.samples - q.correct;
    if (wrong < k) {
      sum += 1.0;
      continue;
    }
    // C(wrong, k) / C(n, k) = prod_{i = wrong + 1}^{n} (1 - k / i)
    double miss = 1.0;
    for (std::size_t i = wrong + 1; i <= q.samples; ++i)
      miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
    sum += 1.0 - miss;
  }
  return sum / static_cast<double>(per_question.size());
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw UsageError("spearman_rho: length mismatch");
  if (xs.size() < 2) throw UsageError("spearman_rho: need at least 2 points");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace kgtool
