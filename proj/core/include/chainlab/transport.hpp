#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace chainlab::transport {

/// Largest |mu| + |nu| accepted by the exact transportation solver.
inline constexpr std::size_t kMaxTotalAtoms = 1024;

/// Finitely supported probability measure on R^dim. Atoms are rows.
class DiscreteMeasure {
 public:
  static DiscreteMeasure create(Eigen::MatrixXd atoms, Eigen::VectorXd weights);

  std::size_t size() const noexcept { return static_cast<std::size_t>(atoms_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(atoms_.cols()); }
  const Eigen::MatrixXd& atoms() const noexcept { return atoms_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }

  /// Same weights with every atom multiplied by factor.
  DiscreteMeasure dilated(double factor) const;

 private:
  DiscreteMeasure(Eigen::MatrixXd atoms, Eigen::VectorXd weights)
      : atoms_(std::move(atoms)), weights_(std::move(weights)) {}

  Eigen::MatrixXd atoms_;
  Eigen::VectorXd weights_;
};

/// sum mu_i log(mu_i / nu_i) with 0 log 0 = 0. Atoms are matched by exact
/// coordinates; mass of mu on an atom where nu has none raises
/// AbsoluteContinuityError.
double kl_divergence(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct TransportResult {
  double value = 0.0;
  Eigen::MatrixXd plan;            // |mu| x |nu| coupling
  Eigen::VectorXd row_potential;   // dual variables u
  Eigen::VectorXd col_potential;   // dual variables v
  double slackness_residual = 0.0; // max dual infeasibility plus sum pi |c - u - v|
  std::size_t pivots = 0;
};

/// Exact optimal transport with squared Euclidean cost.
TransportResult transport_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Exact optimal transport with an explicit |mu| x |nu| cost table.
TransportResult transport_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const Eigen::MatrixXd& cost);

/// Transportation simplex on raw marginals; the underlying solver.
TransportResult solve_transportation(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                     const Eigen::MatrixXd& cost);

/// Standard normal restricted to the uniform grid of m points on [-L, L],
/// weights proportional to the density. Requires odd m >= 41 and L >= 6.
DiscreteMeasure discretize_gaussian(std::size_t m, double half_width);

struct T2Check {
  double transport = 0.0;  // T(mu, gamma_grid), quadratic cost
  double bound = 0.0;      // 2 KL(mu || gamma_grid)
  double margin = 0.0;     // bound - transport
};

/// mu has weights proportional to density * gamma on the grid.
T2Check t2_check(std::span<const double> density, std::size_t m, double half_width);

}  // namespace chainlab::transport
