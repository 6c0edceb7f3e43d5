#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "chainlab/stats.hpp"

namespace chainlab::concentration {

/// A point of {0, ..., q-1}^N.
using Point = std::vector<std::uint8_t>;

/// Subset of coordinates as a bit mask; bit i set means coordinate i is in the set.
using Pattern = std::uint64_t;

inline constexpr std::size_t kMaxFactors = 64;
inline constexpr std::uint64_t kExhaustiveLimit = std::uint64_t{1} << 20;

/// Finite alphabet {0..q-1}, N identical factors with law `weights`, and an
/// explicit subset A of the product.
class ProductSpaceInstance {
 public:
  static ProductSpaceInstance create(std::size_t q, std::size_t n_factors,
                                     std::vector<double> weights, std::vector<Point> set);
  static ProductSpaceInstance uniform(std::size_t q, std::size_t n_factors, std::vector<Point> set);

  std::size_t alphabet() const noexcept { return q_; }
  std::size_t factors() const noexcept { return n_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<Point>& set() const noexcept { return set_; }

  double probability(const Point& x) const;
  /// P(A).
  double set_probability() const;
  bool contains(const Point& x) const;

  /// q^N, saturating at UINT64_MAX.
  std::uint64_t space_size() const noexcept;
  /// Throws SizeLimitExceeded unless q^N <= 2^20.
  void require_exhaustive() const;
  /// Mixed-radix decoding; coordinate 0 is the fastest-varying digit.
  Point point_at(std::uint64_t index) const;

 private:
  ProductSpaceInstance(std::size_t q, std::size_t n, std::vector<double> w, std::vector<Point> a)
      : q_(q), n_(n), weights_(std::move(w)), set_(std::move(a)) {}

  std::size_t q_;
  std::size_t n_;
  std::vector<double> weights_;
  std::vector<Point> set_;
};

/// min over y in A of sum_i cost(x_i, y_i). cost is q x q, nonnegative with zero diagonal.
double hamming_f(const Eigen::MatrixXd& cost, const std::vector<Point>& set, const Point& x);

/// Disagreement pattern {i : x_i != y_i}.
Pattern disagreement(const Point& x, const Point& y);

/// Minimal elements of {disagreement(x, y) : y in A}, ordered by size then value.
/// Their upward closure is U_A(x).
std::vector<Pattern> pattern_generators(const std::vector<Point>& set, const Point& x);

/// 0/1 vector of a pattern in R^N.
Eigen::VectorXd pattern_vector(Pattern pattern, std::size_t n_factors);

struct ConvexDistanceResult {
  double value = 0.0;                              // f_c(A, x)
  std::vector<std::pair<Pattern, double>> witness; // convex combination achieving it
  Eigen::VectorXd point;                           // the minimum-norm point itself
  std::size_t iterations = 0;
};

/// Convex distance from already-pruned generators. Iteration cap 10 N |generators|.
ConvexDistanceResult convex_distance_from_patterns(const std::vector<Pattern>& generators,
                                                   std::size_t n_factors, double tol = 1e-9);

/// f_c(A, x): distance from 0 to the convex hull of U_A(x).
ConvexDistanceResult convex_distance(const std::vector<Point>& set, const Point& x,
                                     double tol = 1e-9);

/// f_c(A, x) for every x in the product, indexed as in point_at().
std::vector<double> convex_distance_table(const ProductSpaceInstance& instance);

struct ExpMomentCheck {
  double lhs = 0.0;     // E exp(f_c^2 / 4)
  double rhs = 0.0;     // 1 / P(A)
  double margin = 0.0;  // rhs - lhs
};

ExpMomentCheck check_exp_moment(const ProductSpaceInstance& instance);
/// Same, reusing a precomputed convex-distance table.
ExpMomentCheck check_exp_moment(const ProductSpaceInstance& instance,
                                const std::vector<double>& fc_table);

struct EnlargementResult {
  double t = 0.0;
  double measure = 0.0;         // P(A_t)
  double corollary_bound = 0.0; // 1 - exp(-t^2/4) / P(A)
  bool holds = true;
};

EnlargementResult enlargement_measure(const ProductSpaceInstance& instance, double t);
EnlargementResult enlargement_measure(const ProductSpaceInstance& instance,
                                      const std::vector<double>& fc_table, double t);

struct DualCheckResult {
  bool ok = true;
  double convex_distance = 0.0;
  std::size_t directions_checked = 0;
  std::string counterexample;  // empty when ok
};

/// Cross-checks f_c against the direction characterization of A_t: if
/// f_c > t the min-norm direction must separate x from A at level t; if
/// f_c <= t every sampled direction must be matched by some y in A.
DualCheckResult dual_check(const ProductSpaceInstance& instance, const Point& x, double t,
                           std::size_t n_directions, std::uint64_t seed);

enum class Center { median, mean };

/// Empirical deviation tails about the median and about the mean.
struct TailReport {
  std::string name;
  std::size_t trials = 0;
  double median = 0.0;
  double mean = 0.0;
  double scale = 1.0;   // deviations are compared at parameter * scale
  Center asserted = Center::median;
  std::vector<TailPoint> median_tail;
  std::vector<TailPoint> mean_tail;

  const std::vector<TailPoint>& asserted_tail() const noexcept {
    return asserted == Center::median ? median_tail : mean_tail;
  }
  std::size_t violations() const noexcept;
};

enum class VectorNorm { l2, linf };
enum class BoundedLaw { rademacher, uniform };

/// sigma for the norm: l2 -> sqrt(lambda_max(sum v v^T)); linf -> max_j sqrt(sum_i v_ij^2).
double weak_variance_sigma(const Eigen::MatrixXd& vectors, VectorNorm norm);

/// |‖sum Y_i v_i‖ - M| >= t sigma against 4 exp(-t^2/16). Rows of vectors are v_i.
TailReport vector_sum_tail_check(const Eigen::MatrixXd& vectors, VectorNorm norm, BoundedLaw law,
                                 std::size_t trials, std::uint64_t seed,
                                 const std::vector<double>& t_grid);

enum class SphereFunctional { coordinate, distance_to_point };

/// Uniform measure on S^{n-1}: |f - M| >= eps against 2 exp(-(n-1) eps^2).
TailReport sphere_tail_check(std::size_t n, SphereFunctional f, std::size_t trials,
                             std::uint64_t seed, const std::vector<double>& eps_grid);

enum class GaussFunctional { euclidean_norm, max_coordinate, distance_to_point };

/// Standard Gaussian on R^n: |F - E F| >= t against 2 exp(-t^2/2).
TailReport gauss_tail_check(std::size_t n, GaussFunctional f, std::size_t trials,
                            std::uint64_t seed, const std::vector<double>& t_grid);

struct TwoSmoothResult {
  double max_violation = 0.0;  // max of (|f+g| + |f-g|)/2 - 1 - C |g|^2
  double constant = 0.0;       // C = (p - 1) / 2
  std::size_t trials = 0;
};

/// Randomized search for violations of the 2-smoothness inequality in l_p^dim, p >= 2.
TwoSmoothResult two_smooth_check(double p, std::size_t dim, std::size_t trials,
                                 std::uint64_t seed);

double lp_norm(const Eigen::VectorXd& v, double p);

}  // namespace chainlab::concentration
