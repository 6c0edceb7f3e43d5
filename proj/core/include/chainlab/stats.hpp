#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace chainlab {

/// Number of binomial standard errors an empirical frequency may exceed a
/// bound before it counts as a violation.
inline constexpr double kViolationSigmas = 3.0;

/// sqrt(p(1-p)/n) for an empirical frequency p over n trials.
double binomial_stderr(double frequency, std::size_t trials) noexcept;

/// True when empirical > bound + 3 standard errors.
bool is_violation(double empirical, double bound, double stderr_) noexcept;

/// Midpoint order statistic: the element of rank floor((n-1)/2) in sorted order.
double lower_median(std::vector<double> values);

double mean(std::span<const double> values) noexcept;

/// Unbiased sample standard deviation (0 when fewer than two values).
double sample_stddev(std::span<const double> values) noexcept;

/// One grid point of an empirical-tail-versus-bound comparison.
struct TailPoint {
  double parameter = 0.0;  // t, epsilon or lambda, depending on the check
  double empirical = 0.0;
  double bound = 0.0;
  double stderr_ = 0.0;
  bool violation = false;
};

/// Builds a TailPoint from an exceedance count.
TailPoint make_tail_point(double parameter, std::size_t exceedances, std::size_t trials,
                          double bound) noexcept;

/// Fraction of |values[i] - center| >= threshold, for each threshold.
std::vector<std::size_t> count_deviations(std::span<const double> values, double center,
                                          std::span<const double> thresholds);

/// Batch-means standard error of a correlated trace.
double batch_means_stderr(std::span<const double> trace, std::size_t n_batches);

}  // namespace chainlab
