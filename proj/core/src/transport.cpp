#include "chainlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "chainlab/errors.hpp"

namespace chainlab::transport {

namespace {

constexpr std::size_t kMaxPivots = 200000;

struct Cell {
  std::size_t row;
  std::size_t col;
  double flow;
};

// Spanning-tree basis of the transportation problem. Node r < m is a row
// (supply) node; node m + c is a column (demand) node.
class TransportationSimplex {
 public:
  TransportationSimplex(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                        const Eigen::MatrixXd& cost)
      : m_(static_cast<std::size_t>(supply.size())),
        n_(static_cast<std::size_t>(demand.size())),
        cost_(cost),
        u_(m_),
        v_(n_) {
    north_west_corner(supply, demand);
  }

  TransportResult solve() {
    const double scale = std::max(1.0, cost_.cwiseAbs().maxCoeff());
    const double entering_tol = 1e-12 * scale;
    std::size_t pivots = 0;
    for (;;) {
      compute_potentials();
      double most_negative = -entering_tol;
      std::size_t ei = m_, ej = n_;
      for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t i = 0; i < m_; ++i) {
          const double reduced = cost_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                 u_(static_cast<Eigen::Index>(i)) - v_(static_cast<Eigen::Index>(j));
          if (reduced < most_negative) {
            most_negative = reduced;
            ei = i;
            ej = j;
          }
        }
      if (ei == m_) break;
      if (++pivots > kMaxPivots) throw NonConvergence("transportation simplex pivot cap reached");
      pivot(ei, ej);
    }
    return finish(pivots);
  }

 private:
  void north_west_corner(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand) {
    std::vector<double> a(supply.data(), supply.data() + m_);
    std::vector<double> b(demand.data(), demand.data() + n_);
    std::size_t i = 0, j = 0;
    for (;;) {
      const double x = std::min(a[i], b[j]);
      basis_.push_back({i, j, x});
      a[i] -= x;
      b[j] -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (j == n_ - 1 || (i < m_ - 1 && a[i] <= b[j])) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void rebuild_adjacency() {
    adjacency_.assign(m_ + n_, {});
    for (std::size_t c = 0; c < basis_.size(); ++c) {
      adjacency_[basis_[c].row].push_back(c);
      adjacency_[m_ + basis_[c].col].push_back(c);
    }
  }

  std::size_t other_end(std::size_t cell, std::size_t node) const {
    const Cell& e = basis_[cell];
    return node == e.row ? m_ + e.col : e.row;
  }

  void compute_potentials() {
    rebuild_adjacency();
    std::vector<bool> seen(m_ + n_, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    u_(0) = 0.0;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t c : adjacency_[node]) {
        const std::size_t next = other_end(c, node);
        if (seen[next]) continue;
        seen[next] = true;
        const Cell& e = basis_[c];
        const double cij = cost_(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col));
        if (next >= m_) {
          v_(static_cast<Eigen::Index>(e.col)) = cij - u_(static_cast<Eigen::Index>(e.row));
        } else {
          u_(static_cast<Eigen::Index>(e.row)) = cij - v_(static_cast<Eigen::Index>(e.col));
        }
        stack.push_back(next);
      }
    }
  }

  // Tree path (as basis cell indices) from row node `from` to column node `to`.
  std::vector<std::size_t> tree_path(std::size_t from, std::size_t to) const {
    std::vector<std::size_t> parent_cell(m_ + n_, basis_.size());
    std::vector<bool> seen(m_ + n_, false);
    std::vector<std::size_t> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node == to) break;
      for (std::size_t c : adjacency_[node]) {
        const std::size_t next = other_end(c, node);
        if (seen[next]) continue;
        seen[next] = true;
        parent_cell[next] = c;
        stack.push_back(next);
      }
    }
    std::vector<std::size_t> path;
    for (std::size_t node = to; node != from;) {
      const std::size_t c = parent_cell[node];
      path.push_back(c);
      node = other_end(c, node);
    }
    return path;  // ordered from `to` back toward `from`
  }

  void pivot(std::size_t row, std::size_t col) {
    // Path from the entering column back to the entering row; links alternate -, +, -, ...
    const std::vector<std::size_t> path = tree_path(row, m_ + col);
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving = basis_.size();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const double f = basis_[path[k]].flow;
      if (f < theta) {
        theta = f;
        leaving = path[k];
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      Cell& e = basis_[path[k]];
      e.flow += (k % 2 == 0) ? -theta : theta;
      if (e.flow < 0.0) e.flow = 0.0;
    }
    basis_[leaving] = {row, col, theta};
  }

  TransportResult finish(std::size_t pivots) {
    compute_potentials();
    TransportResult out;
    out.pivots = pivots;
    out.plan = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(n_));
    double complementary = 0.0;
    for (const Cell& e : basis_) {
      const auto i = static_cast<Eigen::Index>(e.row), j = static_cast<Eigen::Index>(e.col);
      out.plan(i, j) += e.flow;
      out.value += e.flow * cost_(i, j);
      complementary += e.flow * std::abs(cost_(i, j) - u_(i) - v_(j));
    }
    double infeasibility = 0.0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n_); ++j)
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m_); ++i)
        infeasibility = std::max(infeasibility, u_(i) + v_(j) - cost_(i, j));
    out.slackness_residual = infeasibility + complementary;
    out.row_potential = u_;
    out.col_potential = v_;
    return out;
  }

  std::size_t m_, n_;
  const Eigen::MatrixXd& cost_;
  Eigen::VectorXd u_, v_;
  std::vector<Cell> basis_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

void check_sizes(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const std::size_t total = mu.size() + nu.size();
  if (total > kMaxTotalAtoms) throw SizeLimitExceeded("exact transport", total, kMaxTotalAtoms);
}

}  // namespace

DiscreteMeasure DiscreteMeasure::create(Eigen::MatrixXd atoms, Eigen::VectorXd weights) {
  if (atoms.rows() == 0 || atoms.cols() == 0) throw InvalidArgument("measure needs atoms");
  if (weights.size() != atoms.rows()) throw InvalidArgument("one weight per atom required");
  if (!atoms.allFinite() || !weights.allFinite()) throw InvalidArgument("non-finite measure data");
  if ((weights.array() < 0.0).any()) throw InvalidArgument("weights must be nonnegative");
  if (std::abs(weights.sum() - 1.0) > 1e-12) throw InvalidArgument("weights must sum to 1");
  std::map<std::vector<double>, Eigen::Index> seen;
  for (Eigen::Index r = 0; r < atoms.rows(); ++r) {
    std::vector<double> key(static_cast<std::size_t>(atoms.cols()));
    for (Eigen::Index c = 0; c < atoms.cols(); ++c) key[static_cast<std::size_t>(c)] = atoms(r, c);
    if (!seen.emplace(std::move(key), r).second) throw InvalidArgument("atoms must be distinct");
  }
  return DiscreteMeasure(std::move(atoms), std::move(weights));
}

DiscreteMeasure DiscreteMeasure::dilated(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw InvalidArgument("dilation must be positive");
  return DiscreteMeasure(atoms_ * factor, weights_);
}

double kl_divergence(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw InvalidArgument("measures live in different dimensions");
  std::map<std::vector<double>, double> nu_mass;
  for (Eigen::Index r = 0; r < nu.atoms().rows(); ++r) {
    std::vector<double> key(nu.dim());
    for (std::size_t c = 0; c < nu.dim(); ++c) key[c] = nu.atoms()(r, static_cast<Eigen::Index>(c));
    nu_mass[std::move(key)] = nu.weights()(r);
  }
  double kl = 0.0;
  for (Eigen::Index r = 0; r < mu.atoms().rows(); ++r) {
    const double p = mu.weights()(r);
    if (p == 0.0) continue;
    std::vector<double> key(mu.dim());
    for (std::size_t c = 0; c < mu.dim(); ++c) key[c] = mu.atoms()(r, static_cast<Eigen::Index>(c));
    const auto it = nu_mass.find(key);
    if (it == nu_mass.end() || it->second <= 0.0)
      throw AbsoluteContinuityError("mu charges an atom where nu has no mass");
    kl += p * std::log(p / it->second);
  }
  return std::max(kl, 0.0);
}

TransportResult solve_transportation(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                     const Eigen::MatrixXd& cost) {
  if (supply.size() == 0 || demand.size() == 0) throw InvalidArgument("empty marginal");
  if (cost.rows() != supply.size() || cost.cols() != demand.size())
    throw InvalidArgument("cost table shape does not match the marginals");
  if (!cost.allFinite()) throw InvalidArgument("cost table must be finite");
  TransportationSimplex simplex(supply, demand, cost);
  return simplex.solve();
}

TransportResult transport_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw InvalidArgument("measures live in different dimensions");
  check_sizes(mu, nu);
  Eigen::MatrixXd cost(mu.atoms().rows(), nu.atoms().rows());
  for (Eigen::Index i = 0; i < cost.rows(); ++i)
    for (Eigen::Index j = 0; j < cost.cols(); ++j)
      cost(i, j) = (mu.atoms().row(i) - nu.atoms().row(j)).squaredNorm();
  return solve_transportation(mu.weights(), nu.weights(), cost);
}

TransportResult transport_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const Eigen::MatrixXd& cost) {
  check_sizes(mu, nu);
  if ((cost.array() < 0.0).any()) throw InvalidArgument("cost table must be nonnegative");
  return solve_transportation(mu.weights(), nu.weights(), cost);
}

DiscreteMeasure discretize_gaussian(std::size_t m, double half_width) {
  if (m < 41 || m % 2 == 0) throw InvalidArgument("grid size must be odd and at least 41");
  if (!(half_width >= 6.0) || !std::isfinite(half_width))
    throw InvalidArgument("grid half-width must be at least 6");
  const auto count = static_cast<Eigen::Index>(m);
  const double denom = static_cast<double>(m - 1);
  Eigen::MatrixXd atoms(count, 1);
  Eigen::VectorXd weights(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double x = half_width * (2.0 * static_cast<double>(i) - denom) / denom;
    atoms(i, 0) = x;
    weights(i) = std::exp(-0.5 * x * x);
  }
  weights /= weights.sum();
  return DiscreteMeasure::create(std::move(atoms), std::move(weights));
}

T2Check t2_check(std::span<const double> density, std::size_t m, double half_width) {
  const DiscreteMeasure gamma = discretize_gaussian(m, half_width);
  if (density.size() != m) throw InvalidArgument("density must have one value per grid point");
  Eigen::VectorXd w(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    if (!(density[i] > 0.0) || !std::isfinite(density[i]))
      throw InvalidArgument("density values must be positive and finite");
    w(static_cast<Eigen::Index>(i)) = density[i] * gamma.weights()(static_cast<Eigen::Index>(i));
  }
  w /= w.sum();
  const DiscreteMeasure mu = DiscreteMeasure::create(gamma.atoms(), std::move(w));
  T2Check out;
  out.transport = transport_cost(mu, gamma).value;
  out.bound = 2.0 * kl_divergence(mu, gamma);
  out.margin = out.bound - out.transport;
  return out;
}

}  // namespace chainlab::transport
