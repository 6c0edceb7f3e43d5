#include "chainlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chainlab/errors.hpp"

namespace chainlab {

double binomial_stderr(double frequency, std::size_t trials) noexcept {
  if (trials == 0) return 0.0;
  const double p = std::clamp(frequency, 0.0, 1.0);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

bool is_violation(double empirical, double bound, double stderr_) noexcept {
  return empirical - bound > kViolationSigmas * stderr_;
}

double lower_median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of empty sample");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

double mean(std::span<const double> values) noexcept {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) noexcept {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

TailPoint make_tail_point(double parameter, std::size_t exceedances, std::size_t trials,
                          double bound) noexcept {
  TailPoint p;
  p.parameter = parameter;
  p.empirical = trials == 0 ? 0.0 : static_cast<double>(exceedances) / static_cast<double>(trials);
  p.bound = bound;
  p.stderr_ = binomial_stderr(p.empirical, trials);
  p.violation = is_violation(p.empirical, p.bound, p.stderr_);
  return p;
}

std::vector<std::size_t> count_deviations(std::span<const double> values, double center,
                                          std::span<const double> thresholds) {
  std::vector<std::size_t> counts(thresholds.size(), 0);
  for (double v : values) {
    const double dev = std::abs(v - center);
    for (std::size_t k = 0; k < thresholds.size(); ++k)
      if (dev >= thresholds[k]) ++counts[k];
  }
  return counts;
}

double batch_means_stderr(std::span<const double> trace, std::size_t n_batches) {
  if (n_batches < 2) throw InvalidArgument("batch means needs at least two batches");
  const std::size_t batch = trace.size() / n_batches;
  if (batch == 0) throw InvalidArgument("trace shorter than the number of batches");
  std::vector<double> means(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b)
    means[b] = mean(trace.subspan(b * batch, batch));
  return sample_stddev(means) / std::sqrt(static_cast<double>(n_batches));
}

}  // namespace chainlab
