#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace chainlab {

/// Minimum-norm point of conv{points}, with its convex weights.
struct MinNormPoint {
  Eigen::VectorXd point;
  std::vector<std::size_t> support;  // indices into the generator list
  std::vector<double> weights;       // convex weights on support, summing to 1
  double gap = 0.0;                  // |p|^2 - min_i <p, g_i>; zero at the optimum
  std::size_t iterations = 0;
};

/// Wolfe's active-set method: alternates a linear-minimization step over the
/// generators with an affine projection onto the current corral, dropping
/// corral members whose weights would turn negative.
///
/// Stops when |p|^2 - min_i <p, g_i> <= tol (1 + |p|^2). Throws
/// NonConvergence if the major+minor iteration count exceeds max_iterations.
MinNormPoint min_norm_point(const std::vector<Eigen::VectorXd>& generators, double tol,
                            std::size_t max_iterations);

}  // namespace chainlab
