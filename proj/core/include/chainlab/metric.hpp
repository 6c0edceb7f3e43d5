#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace chainlab::metric {

/// Largest space for which the exact covering number is computed.
inline constexpr std::size_t kExactCoverMaxPoints = 24;

/// Relative slack allowed in the triangle inequality.
inline constexpr double kTriangleTolerance = 1e-9;

/// A finite (pseudo)metric space given by a validated distance matrix.
///
/// Construction goes through validate_metric(); the matrix is never repaired.
/// Distinct points at distance zero are allowed, since canonical metrics of
/// degenerate processes produce them.
class FiniteMetricSpace {
 public:
  std::size_t size() const noexcept { return static_cast<std::size_t>(dist_.rows()); }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return dist_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& distances() const noexcept { return dist_; }

  /// Largest pairwise distance.
  double diameter() const noexcept;

  /// Same space with every distance multiplied by factor > 0.
  FiniteMetricSpace scaled(double factor) const;

  /// Sub-space induced by the given indices, in the given order.
  FiniteMetricSpace restricted(const std::vector<std::size_t>& indices) const;

  /// Distance from point t to the nearest member of set (lowest index wins ties).
  double distance_to_set(std::size_t t, const std::vector<std::size_t>& set) const;

 private:
  explicit FiniteMetricSpace(Eigen::MatrixXd dist) : dist_(std::move(dist)) {}
  friend FiniteMetricSpace validate_metric(const Eigen::MatrixXd& raw);

  Eigen::MatrixXd dist_;
};

/// Checks squareness, finiteness, zero diagonal, symmetry, nonnegativity and
/// the triangle inequality (relative tolerance 1e-9).
///
/// Throws AsymmetryError, NegativeDistanceError, TriangleViolation (with the
/// witness triple), or InvalidArgument for shape and finiteness problems.
FiniteMetricSpace validate_metric(const Eigen::MatrixXd& raw);

/// Euclidean distances between the rows of points.
FiniteMetricSpace euclidean_space(const Eigen::MatrixXd& points);

enum class CoverMode { exact, greedy };

/// Farthest-point traversal from index 0: each new center is the point
/// farthest from the current centers (lowest index on ties), added while that
/// distance exceeds eps. The result is an eps-net and an eps-packing.
std::vector<std::size_t> greedy_net(const FiniteMetricSpace& space, double eps);

/// Number of closed eps-balls centered in the space needed to cover it.
///
/// Exact mode solves the set cover by branch and bound (n <= 24, otherwise
/// SizeLimitExceeded); greedy mode returns |greedy_net(eps)|.
std::size_t covering_number(const FiniteMetricSpace& space, double eps, CoverMode mode);

/// Step function eps -> N(T, d, eps).
///
/// counts[0] holds on [0, breakpoints[0]); counts[j] holds on
/// [breakpoints[j-1], breakpoints[j]); the last count holds on
/// [breakpoints.back(), inf) and equals 1.
struct EntropyProfile {
  std::vector<double> breakpoints;
  std::vector<std::size_t> counts;
  CoverMode mode = CoverMode::exact;

  /// Covering number at eps >= 0.
  std::size_t count_at(double eps) const;
};

EntropyProfile entropy_profile(const FiniteMetricSpace& space, CoverMode mode);

}  // namespace chainlab::metric
