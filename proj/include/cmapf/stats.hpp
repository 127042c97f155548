#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "cmapf/error.hpp"
#include "cmapf/rng.hpp"

namespace cmapf {

/// Mean after dropping floor(n/4) values from each end; plain mean for n < 4.
inline double iqm(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "iqm of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t trim = v.size() < 4 ? 0 : v.size() / 4;
  const double base = v[trim];
  double sum = 0.0;
  for (std::size_t i = trim; i < v.size() - trim; ++i) sum += v[i] - base;
  return base + sum / static_cast<double>(v.size() - 2 * trim);
}

inline double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "mean of an empty sample");
  const double base = values[0];
  double sum = 0.0;
  for (const double x : values) sum += x - base;
  return base + sum / static_cast<double>(values.size());
}

/// Linear-interpolation quantile (Hyndman-Fan type 7) of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

using Statistic = std::function<double(std::span<const double>)>;

/// Percentile bootstrap. Each resample draws n indices with replacement.
inline Interval bootstrap_ci(std::span<const double> values, RngKey key, std::size_t resamples = 1000,
                             double level = 0.95, const Statistic& statistic = iqm) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "bootstrap of an empty sample");
  if (resamples == 0) throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least one resample");
  RandomStream rs(key);
  std::vector<double> stats(resamples);
  std::vector<double> draw(values.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    for (double& d : draw) d = values[static_cast<std::size_t>(rs.below(values.size()))];
    stats[b] = statistic(draw);
  }
  std::sort(stats.begin(), stats.end());
  const double alpha = (1.0 - level) / 2.0;
  const double point = statistic(values);
  return {std::min(point, quantile_sorted(stats, alpha)), std::max(point, quantile_sorted(stats, 1.0 - alpha))};
}

/// Fraction of scores strictly above each threshold.
inline std::vector<double> performance_profile(std::span<const double> scores, std::span<const double> taus) {
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(taus.size());
  for (const double tau : taus) {
    if (sorted.empty()) {
      out.push_back(0.0);
      continue;
    }
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), tau);
    out.push_back(static_cast<double>(above) / static_cast<double>(sorted.size()));
  }
  return out;
}

/// Mean shortfall below 1 of normalized scores.
inline double optimality_gap(std::span<const double> normalized_scores) {
  if (normalized_scores.empty()) throw Error(ErrorCode::EmptyInput, "optimality gap of an empty sample");
  double sum = 0.0;
  for (const double s : normalized_scores) sum += std::max(0.0, 1.0 - s);
  return sum / static_cast<double>(normalized_scores.size());
}

/// Mann-Whitney estimate of P(X > Y) with ties counted half.
inline double prob_improvement(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::EmptyInput, "probability of improvement needs two non-empty samples");
  // Counted in half-units so the sum stays an exact integer.
  std::size_t half_wins = 0;
  for (const double a : x) {
    for (const double b : y) half_wins += a > b ? 2 : (a == b ? 1 : 0);
  }
  return static_cast<double>(half_wins) / (2.0 * static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

}  // namespace cmapf
