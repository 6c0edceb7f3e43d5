#pragma once

// Slow, straightforward reference computations. None of these call into the
// library's solvers; they exist to check them.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Smallest number of closed eps-balls centered at points covering all points,
/// by trying every subset in order of size. n <= 20.
std::size_t covering_number(const Eigen::MatrixXd& dist, double eps);

/// Step profile from brute-force covers: returns the distinct positive distances
/// and the covering number at each interval midpoint (last interval: count 1).
struct Profile {
  std::vector<double> breakpoints;
  std::vector<std::size_t> counts;
};
Profile entropy_profile(const Eigen::MatrixXd& dist);

/// Area under eps -> sqrt(log2 N(eps)) by midpoint sampling of each interval.
double dudley(const Profile& p);
/// max over breakpoints of b * sqrt(log2 N(b-)).
double sudakov(const Profile& p);

/// min over T0 (one point) and T1 (1..4 points) of max_t [d(t,T0) + sqrt2 d(t,T1)],
/// written as nested loops over index tuples. n <= 9.
double gamma2_small(const Eigen::MatrixXd& dist);

/// Minimum Euclidean norm over the convex hull of the given points, by
/// enumerating every subset, solving the KKT system of the affine minimizer and
/// keeping the feasible ones. |points| <= 16.
double min_norm_over_hull(const std::vector<Eigen::VectorXd>& points);

/// Same quantity by scanning a simplex grid of step 1/steps (upper bound; small cases only).
double min_norm_over_hull_grid(const std::vector<Eigen::VectorXd>& points, int steps);

/// Quadratic transport cost between two 1-D measures via the monotone (quantile) coupling.
double monotone_transport(std::vector<double> x, std::vector<double> a, std::vector<double> y,
                          std::vector<double> b);

/// Integral of f against the standard normal density, composite Simpson on [-12, 12].
double gauss_expect(const std::function<double(double)>& f, int intervals = 20000);

/// E max of n i.i.d. standard normals = int x n phi(x) Phi(x)^(n-1) dx.
double expected_max_normals(std::size_t n);

/// P(|theta_1| >= eps) for theta uniform on S^{n-1}, from the marginal density
/// proportional to (1 - x^2)^((n-3)/2).
double sphere_coordinate_tail(std::size_t n, double eps);

/// Standard normal upper tail P(Z > x).
double normal_upper_tail(double x);

/// log sum_sigma exp(-beta H(sigma)) by direct enumeration in binary order with
/// long double accumulation. couplings are g_ij for i<j, row by row.
double sk_log_partition(std::size_t n, const std::vector<double>& couplings, double h, double beta);

/// Gibbs mean of H by the same enumeration.
double sk_gibbs_energy(std::size_t n, const std::vector<double>& couplings, double h, double beta);

/// H(sigma) written as a full double loop over ordered pairs divided by two.
double sk_energy(std::size_t n, const std::vector<double>& couplings, double h,
                 const std::vector<int>& sigma);

}  // namespace oracle
