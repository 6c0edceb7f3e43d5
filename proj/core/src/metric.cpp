#include "chainlab/metric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include "chainlab/errors.hpp"

namespace chainlab::metric {

namespace {

using Mask = std::uint32_t;

// Minimum set cover over at most 32 elements by depth-first branch and bound.
// Branches on the uncovered element with the fewest covering sets.
class ExactSetCover {
 public:
  explicit ExactSetCover(std::vector<Mask> sets, std::size_t n_elements)
      : sets_(std::move(sets)), containing_(n_elements) {
    for (std::size_t s = 0; s < sets_.size(); ++s)
      for (std::size_t e = 0; e < n_elements; ++e)
        if ((sets_[s] >> e) & 1U) containing_[e].push_back(s);
  }

  std::size_t solve(Mask universe, std::size_t incumbent) {
    best_ = incumbent;
    search(universe, 0);
    return best_;
  }

 private:
  void search(Mask uncovered, std::size_t used) {
    if (uncovered == 0) {
      best_ = std::min(best_, used);
      return;
    }
    if (used + 1 >= best_) return;

    int max_gain = 0;
    for (Mask s : sets_) max_gain = std::max(max_gain, std::popcount(s & uncovered));
    const int remaining = std::popcount(uncovered);
    const std::size_t lower = static_cast<std::size_t>((remaining + max_gain - 1) / max_gain);
    if (used + lower >= best_) return;

    std::size_t pivot = 0;
    std::size_t fewest = std::numeric_limits<std::size_t>::max();
    for (Mask rest = uncovered; rest != 0; rest &= rest - 1) {
      const auto e = static_cast<std::size_t>(std::countr_zero(rest));
      if (containing_[e].size() < fewest) {
        fewest = containing_[e].size();
        pivot = e;
      }
    }

    std::vector<std::size_t> order = containing_[pivot];
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::popcount(sets_[a] & uncovered) > std::popcount(sets_[b] & uncovered);
    });
    for (std::size_t s : order) search(uncovered & ~sets_[s], used + 1);
  }

  std::vector<Mask> sets_;
  std::vector<std::vector<std::size_t>> containing_;
  std::size_t best_ = 0;
};

std::vector<Mask> closed_balls(const FiniteMetricSpace& space, double eps) {
  const std::size_t n = space.size();
  std::vector<Mask> balls(n, 0);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t j = 0; j < n; ++j)
      if (space(c, j) <= eps) balls[c] |= Mask{1} << j;
  return balls;
}

void require_positive_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw InvalidArgument("covering radius must be positive and finite");
}

std::size_t exact_covering_number(const FiniteMetricSpace& space, double eps,
                                  std::size_t incumbent) {
  const std::size_t n = space.size();
  if (n > kExactCoverMaxPoints)
    throw SizeLimitExceeded("exact covering number", n, kExactCoverMaxPoints);
  const Mask universe = n == 32 ? ~Mask{0} : (Mask{1} << n) - 1;
  ExactSetCover solver(closed_balls(space, eps), n);
  return solver.solve(universe, incumbent);
}

}  // namespace

double FiniteMetricSpace::diameter() const noexcept {
  return dist_.size() == 0 ? 0.0 : dist_.maxCoeff();
}

FiniteMetricSpace FiniteMetricSpace::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw InvalidArgument("scale factor must be positive and finite");
  return FiniteMetricSpace(dist_ * factor);
}

FiniteMetricSpace FiniteMetricSpace::restricted(const std::vector<std::size_t>& indices) const {
  const auto m = static_cast<Eigen::Index>(indices.size());
  Eigen::MatrixXd sub(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b)
      sub(a, b) = (*this)(indices.at(static_cast<std::size_t>(a)),
                          indices.at(static_cast<std::size_t>(b)));
  return FiniteMetricSpace(std::move(sub));
}

double FiniteMetricSpace::distance_to_set(std::size_t t, const std::vector<std::size_t>& set) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s : set) best = std::min(best, (*this)(t, s));
  return best;
}

FiniteMetricSpace validate_metric(const Eigen::MatrixXd& raw) {
  if (raw.rows() != raw.cols()) throw InvalidArgument("distance matrix must be square");
  if (raw.rows() == 0) throw InvalidArgument("distance matrix must have at least one point");
  if (!raw.allFinite()) throw InvalidArgument("distance matrix has non-finite entries");

  const auto n = static_cast<std::size_t>(raw.rows());
  auto d = [&](std::size_t i, std::size_t j) {
    return raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) throw InvalidArgument("distance matrix diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      if (d(i, j) < 0.0) throw NegativeDistanceError(i, j, d(i, j));
      if (j > i) {
        const double scale = std::max({1.0, std::abs(d(i, j)), std::abs(d(j, i))});
        if (std::abs(d(i, j) - d(j, i)) > 1e-12 * scale) throw AsymmetryError(i, j, d(i, j), d(j, i));
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || j == k) continue;
        const double path = d(i, j) + d(j, k);
        if (d(i, k) - path > kTriangleTolerance * std::max(d(i, k), path))
          throw TriangleViolation(i, j, k, d(i, k), d(i, j), d(j, k));
      }

  // Symmetrize exactly so later code can rely on d(i,j) == d(j,i).
  Eigen::MatrixXd sym = 0.5 * (raw + raw.transpose());
  return FiniteMetricSpace(std::move(sym));
}

FiniteMetricSpace euclidean_space(const Eigen::MatrixXd& points) {
  if (points.rows() == 0) throw InvalidArgument("need at least one point");
  if (!points.allFinite()) throw InvalidArgument("points must be finite");
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (points.row(i) - points.row(j)).norm();
      dist(i, j) = v;
      dist(j, i) = v;
    }
  return validate_metric(dist);
}

std::vector<std::size_t> greedy_net(const FiniteMetricSpace& space, double eps) {
  require_positive_eps(eps);
  const std::size_t n = space.size();
  std::vector<std::size_t> centers{0};
  std::vector<double> gap(n);
  for (std::size_t j = 0; j < n; ++j) gap[j] = space(0, j);

  for (;;) {
    std::size_t far = 0;
    for (std::size_t j = 1; j < n; ++j)
      if (gap[j] > gap[far]) far = j;
    if (!(gap[far] > eps)) break;
    centers.push_back(far);
    for (std::size_t j = 0; j < n; ++j) gap[j] = std::min(gap[j], space(far, j));
  }
  return centers;
}

std::size_t covering_number(const FiniteMetricSpace& space, double eps, CoverMode mode) {
  require_positive_eps(eps);
  if (mode == CoverMode::greedy) return greedy_net(space, eps).size();
  if (space.size() > kExactCoverMaxPoints)
    throw SizeLimitExceeded("exact covering number", space.size(), kExactCoverMaxPoints);
  return exact_covering_number(space, eps, greedy_net(space, eps).size());
}

std::size_t EntropyProfile::count_at(double eps) const {
  if (!(eps >= 0.0)) throw InvalidArgument("eps must be nonnegative");
  const auto j = std::upper_bound(breakpoints.begin(), breakpoints.end(), eps) - breakpoints.begin();
  return counts.at(static_cast<std::size_t>(j));
}

EntropyProfile entropy_profile(const FiniteMetricSpace& space, CoverMode mode) {
  const std::size_t n = space.size();
  if (mode == CoverMode::exact && n > kExactCoverMaxPoints)
    throw SizeLimitExceeded("exact entropy profile", n, kExactCoverMaxPoints);

  EntropyProfile profile;
  profile.mode = mode;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (space(i, j) > 0.0) profile.breakpoints.push_back(space(i, j));
  std::sort(profile.breakpoints.begin(), profile.breakpoints.end());
  profile.breakpoints.erase(std::unique(profile.breakpoints.begin(), profile.breakpoints.end()),
                            profile.breakpoints.end());

  const auto& b = profile.breakpoints;
  profile.counts.reserve(b.size() + 1);
  std::size_t previous = n;
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double lo = j == 0 ? 0.0 : b[j - 1];
    const double mid = 0.5 * (lo + b[j]);
    std::size_t count = 0;
    if (mode == CoverMode::greedy) {
      count = greedy_net(space, mid).size();
    } else {
      // Counts are nonincreasing in eps, so the previous value is a valid incumbent.
      const std::size_t incumbent = std::min(previous, greedy_net(space, mid).size());
      count = exact_covering_number(space, mid, incumbent);
    }
    profile.counts.push_back(count);
    previous = count;
  }
  profile.counts.push_back(1);
  return profile;
}

}  // namespace chainlab::metric
