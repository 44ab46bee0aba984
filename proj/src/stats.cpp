#include "rass/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rass/errors.hpp"

namespace rass::stats {

namespace {
void require_non_empty(std::span<const double> xs) {
  if (xs.empty()) throw ValueError("statistic of an empty sample list");
}
}  // namespace

double mean(std::span<const double> xs) {
  require_non_empty(xs);
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  const double mu = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) { return std::sqrt(variance(xs)); }

double min(std::span<const double> xs) {
  require_non_empty(xs);
  return *std::min_element(xs.begin(), xs.end());
}

double max(std::span<const double> xs) {
  require_non_empty(xs);
  return *std::max_element(xs.begin(), xs.end());
}

double percentile(std::span<const double> xs, int n) {
  require_non_empty(xs);
  if (n < 1 || n > 99) throw ValueError("percentile must be in [1, 99]");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  // Integer arithmetic for ceil(n * size / 100) avoids rounding at exact ranks.
  const std::size_t rank = (static_cast<std::size_t>(n) * sorted.size() + 99) / 100;
  return sorted[std::max<std::size_t>(rank, 1) - 1];
}

double coefficient_of_variation(std::span<const double> xs) {
  const double mu = mean(xs);
  if (mu == 0.0 || xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1)) / std::abs(mu);
}

}  // namespace rass::stats
