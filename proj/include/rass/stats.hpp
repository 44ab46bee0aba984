#pragma once

#include <span>

namespace rass::stats {

double mean(std::span<const double> xs);
/// Population variance (divides by n).
double variance(std::span<const double> xs);
double stddev(std::span<const double> xs);
double min(std::span<const double> xs);
double max(std::span<const double> xs);
/// Nearest-rank percentile, n in [1, 99]: the ceil(n/100 * size)-th smallest.
double percentile(std::span<const double> xs, int n);
/// Coefficient of variation with the sample (n - 1) standard deviation; 0 for
/// a zero mean or a single sample.
double coefficient_of_variation(std::span<const double> xs);

}  // namespace rass::stats
