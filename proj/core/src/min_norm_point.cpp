#include "chainlab/min_norm_point.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "chainlab/errors.hpp"

namespace chainlab {

namespace {

// Minimizer of |y| over the affine hull of the corral; returns the affine weights.
Eigen::VectorXd affine_minimizer_weights(const std::vector<Eigen::VectorXd>& generators,
                                         const std::vector<std::size_t>& corral) {
  const auto k = static_cast<Eigen::Index>(corral.size());
  Eigen::VectorXd mu(k);
  if (k == 1) {
    mu(0) = 1.0;
    return mu;
  }
  const Eigen::VectorXd& base = generators[corral[0]];
  Eigen::MatrixXd directions(base.size(), k - 1);
  for (Eigen::Index i = 1; i < k; ++i)
    directions.col(i - 1) = generators[corral[static_cast<std::size_t>(i)]] - base;
  const Eigen::VectorXd c = directions.completeOrthogonalDecomposition().solve(-base);
  mu(0) = 1.0 - c.sum();
  mu.tail(k - 1) = c;
  return mu;
}

Eigen::VectorXd combine(const std::vector<Eigen::VectorXd>& generators,
                        const std::vector<std::size_t>& corral, const std::vector<double>& w) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(generators[corral[0]].size());
  for (std::size_t i = 0; i < corral.size(); ++i) x += w[i] * generators[corral[i]];
  return x;
}

}  // namespace

MinNormPoint min_norm_point(const std::vector<Eigen::VectorXd>& generators, double tol,
                            std::size_t max_iterations) {
  if (generators.empty()) throw EmptySet("min_norm_point needs at least one generator");
  const Eigen::Index dim = generators.front().size();
  for (const auto& g : generators)
    if (g.size() != dim || !g.allFinite()) throw InvalidArgument("generators must be finite and share a dimension");

  constexpr double kDropWeight = 1e-14;

  std::size_t first = 0;
  for (std::size_t i = 1; i < generators.size(); ++i)
    if (generators[i].squaredNorm() < generators[first].squaredNorm()) first = i;

  std::vector<std::size_t> corral{first};
  std::vector<double> w{1.0};
  Eigen::VectorXd x = generators[first];
  std::size_t iterations = 0;
  double gap = 0.0;

  for (;;) {
    if (++iterations > max_iterations) throw NonConvergence("min-norm-point iteration cap reached");

    std::size_t best = 0;
    double best_dot = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < generators.size(); ++i) {
      const double d = x.dot(generators[i]);
      if (d < best_dot) {
        best_dot = d;
        best = i;
      }
    }
    const double xx = x.squaredNorm();
    gap = xx - best_dot;
    if (gap <= tol * (1.0 + xx)) break;
    if (std::find(corral.begin(), corral.end(), best) != corral.end())
      throw NonConvergence("min-norm-point stalled: improving generator already in corral");

    corral.push_back(best);
    w.push_back(0.0);

    for (;;) {
      if (++iterations > max_iterations)
        throw NonConvergence("min-norm-point iteration cap reached");
      const Eigen::VectorXd mu = affine_minimizer_weights(generators, corral);
      if ((mu.array() > kDropWeight).all()) {
        w.assign(mu.data(), mu.data() + mu.size());
        x = combine(generators, corral, w);
        break;
      }
      // Move toward the affine minimizer until the first weight hits zero.
      double theta = 1.0;
      std::size_t blocking = 0;
      for (std::size_t i = 0; i < corral.size(); ++i) {
        const double m = mu(static_cast<Eigen::Index>(i));
        if (m <= kDropWeight) {
          const double denom = w[i] - m;
          const double t = denom > 0.0 ? w[i] / denom : 0.0;
          if (t < theta) {
            theta = t;
            blocking = i;
          }
        }
      }
      for (std::size_t i = 0; i < corral.size(); ++i)
        w[i] = (1.0 - theta) * w[i] + theta * mu(static_cast<Eigen::Index>(i));
      w[blocking] = 0.0;

      std::vector<std::size_t> next_corral;
      std::vector<double> next_w;
      for (std::size_t i = 0; i < corral.size(); ++i)
        if (w[i] > kDropWeight) {
          next_corral.push_back(corral[i]);
          next_w.push_back(w[i]);
        }
      const double total = std::accumulate(next_w.begin(), next_w.end(), 0.0);
      for (double& v : next_w) v /= total;
      corral = std::move(next_corral);
      w = std::move(next_w);
      x = combine(generators, corral, w);
    }
  }

  MinNormPoint out;
  out.point = std::move(x);
  out.support = std::move(corral);
  out.weights = std::move(w);
  out.gap = gap;
  out.iterations = iterations;
  return out;
}

}  // namespace chainlab
