#include "chainlab/concentration.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "chainlab/errors.hpp"
#include "chainlab/min_norm_point.hpp"
#include "chainlab/parallel.hpp"
#include "chainlab/rng.hpp"

namespace chainlab::concentration {

namespace {

constexpr std::size_t kTrialBlock = 4096;

// Draws `trials` scalar values, trial r coming from RNG stream r / kTrialBlock.
template <class Draw>
std::vector<double> draw_values(std::size_t trials, std::uint64_t seed, Draw&& draw) {
  if (trials == 0) throw InvalidArgument("need at least one trial");
  std::vector<double> values(trials);
  const std::size_t blocks = (trials + kTrialBlock - 1) / kTrialBlock;
  parallel_for(blocks, [&](std::size_t b) {
    Philox4x32 rng(seed, b);
    const std::size_t end = std::min(trials, (b + 1) * kTrialBlock);
    for (std::size_t r = b * kTrialBlock; r < end; ++r) values[r] = draw(rng);
  });
  return values;
}

TailReport summarize(std::string name, std::vector<double> values, double scale,
                     const std::vector<double>& grid, Center asserted,
                     double (*bound)(double parameter, double context), double context) {
  TailReport rep;
  rep.name = std::move(name);
  rep.trials = values.size();
  rep.scale = scale;
  rep.asserted = asserted;
  rep.mean = mean(values);
  rep.median = lower_median(values);
  std::vector<double> thresholds(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) thresholds[k] = grid[k] * scale;
  const auto about_median = count_deviations(values, rep.median, thresholds);
  const auto about_mean = count_deviations(values, rep.mean, thresholds);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double b = bound(grid[k], context);
    rep.median_tail.push_back(make_tail_point(grid[k], about_median[k], rep.trials, b));
    rep.mean_tail.push_back(make_tail_point(grid[k], about_mean[k], rep.trials, b));
  }
  return rep;
}

double vector_sum_bound(double t, double) { return 4.0 * std::exp(-t * t / 16.0); }
double sphere_bound(double eps, double n) { return 2.0 * std::exp(-(n - 1.0) * eps * eps); }
double gauss_bound(double t, double) { return 2.0 * std::exp(-t * t / 2.0); }

double sum_over_pattern(const Eigen::VectorXd& alpha, Pattern s) {
  double total = 0.0;
  for (; s != 0; s &= s - 1) total += alpha(std::countr_zero(s));
  return total;
}

}  // namespace

ProductSpaceInstance ProductSpaceInstance::create(std::size_t q, std::size_t n_factors,
                                                  std::vector<double> weights,
                                                  std::vector<Point> set) {
  if (q < 1 || q > 256) throw InvalidArgument("alphabet size must be in [1, 256]");
  if (n_factors < 1 || n_factors > kMaxFactors)
    throw InvalidArgument("number of factors must be in [1, 64]");
  if (weights.size() != q) throw InvalidArgument("weights must have one entry per symbol");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("weights must sum to 1");
  if (set.empty()) throw EmptySet("the set A must be nonempty");
  for (const Point& y : set) {
    if (y.size() != n_factors) throw InvalidArgument("point of A has the wrong length");
    for (auto c : y)
      if (c >= q) throw InvalidArgument("coordinate of A out of range");
  }
  std::vector<Point> sorted = set;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidArgument("points of A must be distinct");
  return ProductSpaceInstance(q, n_factors, std::move(weights), std::move(set));
}

ProductSpaceInstance ProductSpaceInstance::uniform(std::size_t q, std::size_t n_factors,
                                                   std::vector<Point> set) {
  return create(q, n_factors, std::vector<double>(q, 1.0 / static_cast<double>(q)), std::move(set));
}

double ProductSpaceInstance::probability(const Point& x) const {
  if (x.size() != n_) throw InvalidArgument("point has the wrong length");
  double p = 1.0;
  for (auto c : x) p *= weights_.at(c);
  return p;
}

double ProductSpaceInstance::set_probability() const {
  double total = 0.0;
  for (const Point& y : set_) total += probability(y);
  return total;
}

bool ProductSpaceInstance::contains(const Point& x) const {
  return std::find(set_.begin(), set_.end(), x) != set_.end();
}

std::uint64_t ProductSpaceInstance::space_size() const noexcept {
  std::uint64_t size = 1;
  for (std::size_t i = 0; i < n_; ++i) {
    if (size > std::numeric_limits<std::uint64_t>::max() / q_)
      return std::numeric_limits<std::uint64_t>::max();
    size *= q_;
  }
  return size;
}

void ProductSpaceInstance::require_exhaustive() const {
  const std::uint64_t size = space_size();
  if (size > kExhaustiveLimit)
    throw SizeLimitExceeded("exhaustive product-space sweep", static_cast<std::size_t>(
                                                                  std::min<std::uint64_t>(size, SIZE_MAX)),
                            static_cast<std::size_t>(kExhaustiveLimit));
}

Point ProductSpaceInstance::point_at(std::uint64_t index) const {
  Point x(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    x[i] = static_cast<std::uint8_t>(index % q_);
    index /= q_;
  }
  return x;
}

double hamming_f(const Eigen::MatrixXd& cost, const std::vector<Point>& set, const Point& x) {
  if (set.empty()) throw EmptySet("hamming_f: A is empty");
  if (cost.rows() != cost.cols()) throw InvalidArgument("cost table must be square");
  for (Eigen::Index a = 0; a < cost.rows(); ++a) {
    if (cost(a, a) != 0.0) throw InvalidArgument("cost table must have a zero diagonal");
    for (Eigen::Index b = 0; b < cost.cols(); ++b)
      if (!(cost(a, b) >= 0.0)) throw InvalidArgument("cost table must be nonnegative");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const Point& y : set) {
    if (y.size() != x.size()) throw InvalidArgument("point lengths differ");
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] >= cost.rows() || y[i] >= cost.rows()) throw InvalidArgument("symbol outside cost table");
      total += cost(x[i], y[i]);
    }
    best = std::min(best, total);
  }
  return best;
}

Pattern disagreement(const Point& x, const Point& y) {
  if (x.size() != y.size()) throw InvalidArgument("point lengths differ");
  if (x.size() > kMaxFactors) throw InvalidArgument("patterns support at most 64 coordinates");
  Pattern s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) s |= Pattern{1} << i;
  return s;
}

std::vector<Pattern> pattern_generators(const std::vector<Point>& set, const Point& x) {
  if (set.empty()) throw EmptySet("pattern_generators: A is empty");
  std::vector<Pattern> all;
  all.reserve(set.size());
  for (const Point& y : set) all.push_back(disagreement(x, y));
  std::sort(all.begin(), all.end(), [](Pattern a, Pattern b) {
    const int pa = std::popcount(a), pb = std::popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  all.erase(std::unique(all.begin(), all.end()), all.end());

  std::vector<Pattern> minimal;
  for (Pattern s : all) {
    const bool dominated = std::any_of(minimal.begin(), minimal.end(),
                                       [s](Pattern m) { return (m & ~s) == 0; });
    if (!dominated) minimal.push_back(s);
  }
  return minimal;
}

Eigen::VectorXd pattern_vector(Pattern pattern, std::size_t n_factors) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_factors));
  for (Pattern s = pattern; s != 0; s &= s - 1) v(std::countr_zero(s)) = 1.0;
  return v;
}

ConvexDistanceResult convex_distance_from_patterns(const std::vector<Pattern>& generators,
                                                   std::size_t n_factors, double tol) {
  if (generators.empty()) throw EmptySet("convex distance needs at least one pattern");
  ConvexDistanceResult out;
  if (generators.front() == 0) {
    out.point = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_factors));
    out.witness = {{0, 1.0}};
    return out;
  }
  std::vector<Eigen::VectorXd> vecs;
  vecs.reserve(generators.size());
  for (Pattern s : generators) vecs.push_back(pattern_vector(s, n_factors));
  const std::size_t cap = std::max<std::size_t>(10 * n_factors * generators.size(), 10);
  MinNormPoint mnp = min_norm_point(vecs, tol, cap);
  out.value = mnp.point.norm();
  out.point = std::move(mnp.point);
  out.iterations = mnp.iterations;
  for (std::size_t i = 0; i < mnp.support.size(); ++i)
    out.witness.emplace_back(generators[mnp.support[i]], mnp.weights[i]);
  return out;
}

ConvexDistanceResult convex_distance(const std::vector<Point>& set, const Point& x, double tol) {
  return convex_distance_from_patterns(pattern_generators(set, x), x.size(), tol);
}

std::vector<double> convex_distance_table(const ProductSpaceInstance& instance) {
  instance.require_exhaustive();
  const std::uint64_t size = instance.space_size();
  std::vector<double> table(size);
  for (std::uint64_t idx = 0; idx < size; ++idx)
    table[idx] = convex_distance(instance.set(), instance.point_at(idx)).value;
  return table;
}

ExpMomentCheck check_exp_moment(const ProductSpaceInstance& instance) {
  return check_exp_moment(instance, convex_distance_table(instance));
}

ExpMomentCheck check_exp_moment(const ProductSpaceInstance& instance,
                                const std::vector<double>& fc_table) {
  instance.require_exhaustive();
  if (fc_table.size() != instance.space_size()) throw InvalidArgument("table size mismatch");
  ExpMomentCheck out;
  for (std::uint64_t idx = 0; idx < fc_table.size(); ++idx) {
    const double f = fc_table[idx];
    out.lhs += instance.probability(instance.point_at(idx)) * std::exp(0.25 * f * f);
  }
  out.rhs = 1.0 / instance.set_probability();
  out.margin = out.rhs - out.lhs;
  return out;
}

EnlargementResult enlargement_measure(const ProductSpaceInstance& instance, double t) {
  return enlargement_measure(instance, convex_distance_table(instance), t);
}

EnlargementResult enlargement_measure(const ProductSpaceInstance& instance,
                                      const std::vector<double>& fc_table, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("enlargement radius must be nonnegative");
  instance.require_exhaustive();
  if (fc_table.size() != instance.space_size()) throw InvalidArgument("table size mismatch");
  EnlargementResult out;
  out.t = t;
  for (std::uint64_t idx = 0; idx < fc_table.size(); ++idx)
    if (fc_table[idx] <= t + 1e-12) out.measure += instance.probability(instance.point_at(idx));
  out.corollary_bound = 1.0 - std::exp(-0.25 * t * t) / instance.set_probability();
  out.holds = out.measure >= out.corollary_bound - 1e-12;
  return out;
}

DualCheckResult dual_check(const ProductSpaceInstance& instance, const Point& x, double t,
                           std::size_t n_directions, std::uint64_t seed) {
  instance.require_exhaustive();
  if (x.size() != instance.factors()) throw InvalidArgument("point has the wrong length");
  const auto& set = instance.set();
  std::vector<Pattern> patterns;
  patterns.reserve(set.size());
  for (const Point& y : set) patterns.push_back(disagreement(x, y));

  const ConvexDistanceResult fc = convex_distance(set, x);
  DualCheckResult out;
  out.convex_distance = fc.value;
  const double tiny = 1e-9 * (1.0 + t);

  if (fc.value > t) {
    // The normalized min-norm point must separate x from A at level t.
    const Eigen::VectorXd alpha = fc.point / fc.value;
    double worst = std::numeric_limits<double>::infinity();
    for (Pattern s : patterns) worst = std::min(worst, sum_over_pattern(alpha, s));
    out.directions_checked = 1;
    if (!(worst > t - tiny)) {
      out.ok = false;
      std::ostringstream os;
      os.precision(17);
      os << "min-norm direction fails to separate: min_y sum = " << worst << " <= t = " << t;
      out.counterexample = os.str();
    }
    return out;
  }

  Philox4x32 rng(seed, 0);
  const auto n = static_cast<Eigen::Index>(instance.factors());
  for (std::size_t d = 0; d < n_directions; ++d) {
    Eigen::VectorXd alpha(n);
    const bool nonnegative = (d % 2) == 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double g = rng.normal();
      alpha(i) = nonnegative ? std::abs(g) : g;
    }
    double best = std::numeric_limits<double>::infinity();
    for (Pattern s : patterns) best = std::min(best, sum_over_pattern(alpha, s));
    ++out.directions_checked;
    if (best > t * alpha.norm() + 1e-9 * (1.0 + alpha.norm())) {
      out.ok = false;
      std::ostringstream os;
      os.precision(17);
      os << "direction " << d << " separates although f_c = " << fc.value << " <= t = " << t
         << ": min_y sum = " << best << " > t |alpha| = " << t * alpha.norm();
      out.counterexample = os.str();
      return out;
    }
  }
  return out;
}

std::size_t TailReport::violations() const noexcept {
  const auto& tail = asserted_tail();
  return static_cast<std::size_t>(
      std::count_if(tail.begin(), tail.end(), [](const TailPoint& p) { return p.violation; }));
}

double weak_variance_sigma(const Eigen::MatrixXd& vectors, VectorNorm norm) {
  if (vectors.rows() == 0) throw InvalidArgument("need at least one vector");
  if (norm == VectorNorm::l2) {
    const Eigen::MatrixXd gram = vectors.transpose() * vectors;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
  }
  return std::sqrt(vectors.array().square().colwise().sum().maxCoeff());
}

TailReport vector_sum_tail_check(const Eigen::MatrixXd& vectors, VectorNorm norm, BoundedLaw law,
                                 std::size_t trials, std::uint64_t seed,
                                 const std::vector<double>& t_grid) {
  if (!vectors.allFinite()) throw InvalidArgument("vectors must be finite");
  const double sigma = weak_variance_sigma(vectors, norm);
  const Eigen::Index n = vectors.rows();
  auto values = draw_values(trials, seed, [&](Philox4x32& rng) {
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(vectors.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y = law == BoundedLaw::rademacher ? rng.rademacher() : 2.0 * rng.uniform() - 1.0;
      sum.noalias() += y * vectors.row(i);
    }
    return norm == VectorNorm::l2 ? sum.norm() : sum.cwiseAbs().maxCoeff();
  });
  std::string name = std::string("vector_sum/") + (norm == VectorNorm::l2 ? "l2" : "linf") + "/" +
                     (law == BoundedLaw::rademacher ? "rademacher" : "uniform");
  return summarize(std::move(name), std::move(values), sigma, t_grid, Center::median,
                   vector_sum_bound, 0.0);
}

TailReport sphere_tail_check(std::size_t n, SphereFunctional f, std::size_t trials,
                             std::uint64_t seed, const std::vector<double>& eps_grid) {
  if (n < 2) throw InvalidArgument("sphere dimension must be at least 2");
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  auto values = draw_values(trials, seed, [&](Philox4x32& rng) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
    g /= g.norm();
    if (f == SphereFunctional::coordinate) return g(0);
    return (g.array() - inv_sqrt_n).matrix().norm();
  });
  std::string name = std::string("sphere/") +
                     (f == SphereFunctional::coordinate ? "coordinate" : "distance_to_point") +
                     "/n=" + std::to_string(n);
  return summarize(std::move(name), std::move(values), 1.0, eps_grid, Center::median, sphere_bound,
                   static_cast<double>(n));
}

TailReport gauss_tail_check(std::size_t n, GaussFunctional f, std::size_t trials,
                            std::uint64_t seed, const std::vector<double>& t_grid) {
  if (n < 1) throw InvalidArgument("dimension must be at least 1");
  auto values = draw_values(trials, seed, [&](Philox4x32& rng) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
    switch (f) {
      case GaussFunctional::euclidean_norm:
        return g.norm();
      case GaussFunctional::max_coordinate:
        return g.maxCoeff();
      case GaussFunctional::distance_to_point:
        break;
    }
    return (g.array() - 1.0).matrix().norm();
  });
  const char* tag = f == GaussFunctional::euclidean_norm   ? "euclidean_norm"
                    : f == GaussFunctional::max_coordinate ? "max_coordinate"
                                                           : "distance_to_point";
  std::string name = std::string("gauss/") + tag + "/n=" + std::to_string(n);
  return summarize(std::move(name), std::move(values), 1.0, t_grid, Center::mean, gauss_bound, 0.0);
}

double lp_norm(const Eigen::VectorXd& v, double p) {
  const double top = v.cwiseAbs().maxCoeff();
  if (top == 0.0) return 0.0;
  return top * std::pow((v.cwiseAbs() / top).array().pow(p).sum(), 1.0 / p);
}

TwoSmoothResult two_smooth_check(double p, std::size_t dim, std::size_t trials,
                                 std::uint64_t seed) {
  if (!(p >= 2.0) || !std::isfinite(p)) throw DomainError("2-smoothness check requires p >= 2");
  if (dim < 1) throw InvalidArgument("dimension must be at least 1");
  TwoSmoothResult out;
  out.constant = 0.5 * (p - 1.0);
  out.trials = trials;
  const auto d = static_cast<Eigen::Index>(dim);
  const double c = out.constant;
  const auto violations = draw_values(trials, seed, [&](Philox4x32& rng) {
    Eigen::VectorXd f(d), g(d);
    for (Eigen::Index i = 0; i < d; ++i) f(i) = rng.normal();
    for (Eigen::Index i = 0; i < d; ++i) g(i) = rng.normal();
    f /= lp_norm(f, p);
    // Half the trials probe |g| on a log scale down to 1e-4, where the
    // inequality is tight to second order.
    const double u = rng.uniform();
    const double radius = rng.uniform() < 0.5 ? u : std::pow(10.0, -4.0 * u);
    g *= radius / lp_norm(g, p);
    const double gn = lp_norm(g, p);
    return 0.5 * (lp_norm(f + g, p) + lp_norm(f - g, p)) - 1.0 - c * gn * gn;
  });
  out.max_violation = *std::max_element(violations.begin(), violations.end());
  return out;
}

}  // namespace chainlab::concentration
