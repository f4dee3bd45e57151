#pragma once

// Summary statistics for Monte Carlo trials.

#include <cmath>
#include <cstddef>
#include <span>

#include "covrad/covering.hpp"

namespace covrad {

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double stdev = 0.0;  // sample standard deviation (n - 1)
  /// 99% normal-approximation half-width of the mean.
  double ci99 = 0.0;
};

/// Two-pass mean and variance, accumulated in index order.
inline Summary summarize(std::span<const double> v) {
  Summary s;
  s.count = v.size();
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return s;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stdev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  s.ci99 = kZ99 * s.stdev / std::sqrt(static_cast<double>(v.size()));
  return s;
}

inline double fraction_if(std::span<const double> v, auto&& pred) {
  if (v.empty()) return 0.0;
  std::size_t hits = 0;
  for (double x : v) hits += pred(x) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(v.size());
}

}  // namespace covrad
