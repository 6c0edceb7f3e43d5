#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "chainlab/metric.hpp"
#include "chainlab/stats.hpp"

namespace chainlab::gp {

/// A centered Gaussian process on a finite index set {0, ..., n-1}.
///
/// Either a covariance matrix (validated PSD up to -1e-8 relative) or an
/// embedding t -> p_t in R^m with X_t = <g, p_t>, g standard Gaussian.
class GaussianProcessSpec {
 public:
  enum class Kind { covariance, embedding };

  static GaussianProcessSpec from_covariance(Eigen::MatrixXd cov);
  /// Rows of points are the embedded index points.
  static GaussianProcessSpec from_embedding(Eigen::MatrixXd points);

  Kind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  const Eigen::MatrixXd& data() const noexcept { return data_; }
  Eigen::MatrixXd covariance() const;

 private:
  GaussianProcessSpec(Kind kind, Eigen::MatrixXd data) : kind_(kind), data_(std::move(data)) {}

  Kind kind_;
  Eigen::MatrixXd data_;
};

/// d(s,t) = sqrt(E (X_s - X_t)^2). Throws DegenerateCovariance when a squared
/// distance is below -1e-9.
metric::FiniteMetricSpace canonical_metric(const GaussianProcessSpec& spec);

/// Number of sample rows drawn from one RNG stream. Row r always comes from
/// stream r / kSampleBlockRows, which keeps samples independent of the
/// worker count and of the total sample size.
inline constexpr std::size_t kSampleBlockRows = 4096;

/// Draws paths through a fixed linear factor: X = F g.
class PathSampler {
 public:
  explicit PathSampler(const GaussianProcessSpec& spec);

  std::size_t size() const noexcept { return static_cast<std::size_t>(factor_.rows()); }
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }
  /// Diagonal jitter that was added before factorization succeeded (0 if none).
  double jitter() const noexcept { return jitter_; }

  /// Rows [block * kSampleBlockRows, block * kSampleBlockRows + rows) of the sample stream.
  Eigen::MatrixXd block(std::uint64_t seed, std::size_t block_index, std::size_t rows) const;

  /// Number of blocks needed for n_samples rows.
  static std::size_t block_count(std::size_t n_samples) noexcept {
    return (n_samples + kSampleBlockRows - 1) / kSampleBlockRows;
  }
  static std::size_t rows_in_block(std::size_t n_samples, std::size_t block) noexcept {
    const std::size_t start = block * kSampleBlockRows;
    return std::min(kSampleBlockRows, n_samples - start);
  }

 private:
  Eigen::MatrixXd factor_;
  double jitter_ = 0.0;
};

/// n_samples x n matrix of i.i.d. draws of (X_t); deterministic in seed.
Eigen::MatrixXd sample_paths(const GaussianProcessSpec& spec, std::size_t n_samples,
                             std::uint64_t seed);

struct EsupEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::pair<double, double> confidence_95{0.0, 0.0};
};

/// Builds an estimate from running sums of the per-sample maximum.
EsupEstimate make_esup_estimate(double sum, double sum_sq, std::size_t n);

/// Monte Carlo estimate of E max_t X_t (plug-in mean, no bias correction).
EsupEstimate estimate_esup(const GaussianProcessSpec& spec, std::size_t n_samples,
                           std::uint64_t seed);

struct PairTailRecord {
  std::size_t a = 0;
  std::size_t b = 0;
  double distance = 0.0;
  TailPoint tail;  // parameter = lambda; bound = exp(-lambda^2 / (2 d^2))
};

/// Empirical P[X_a - X_b > lambda] against exp(-lambda^2 / 2 d(a,b)^2).
std::vector<PairTailRecord> pairwise_tail_check(
    const GaussianProcessSpec& spec, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    const std::vector<double>& lambdas, std::size_t n_samples, std::uint64_t seed);

}  // namespace chainlab::gp
