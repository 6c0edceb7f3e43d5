#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "chainlab/concentration.hpp"
#include "chainlab/errors.hpp"
#include "chainlab/rng.hpp"
#include "oracles.hpp"

using namespace chainlab;
using namespace chainlab::concentration;

namespace {

Eigen::MatrixXd zero_one(std::size_t q) {
  return Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q)) -
         Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
}

// f_c straight from the definition: hull of every disagreement vector, no pruning.
double fc_oracle(const std::vector<Point>& set, const Point& x) {
  std::set<Pattern> seen;
  std::vector<Eigen::VectorXd> pts;
  for (const auto& y : set) {
    Pattern s = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] != y[i]) s |= Pattern{1} << i;
    if (!seen.insert(s).second) continue;
    Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = (s >> i) & 1U ? 1.0 : 0.0;
    pts.push_back(v);
  }
  return oracle::min_norm_over_hull(pts);
}

Point pt(std::initializer_list<int> xs) {
  Point p;
  for (int x : xs) p.push_back(static_cast<std::uint8_t>(x));
  return p;
}

ProductSpaceInstance random_binary(std::uint64_t seed, std::size_t n) {
  Philox4x32 g(seed, 0);
  const std::uint64_t size = std::uint64_t{1} << n;
  std::vector<Point> set;
  while (set.empty()) {
    for (std::uint64_t i = 0; i < size; ++i) {
      if (g.uniform() < 0.3) {
        Point p(n);
        for (std::size_t k = 0; k < n; ++k) p[k] = static_cast<std::uint8_t>((i >> k) & 1U);
        set.push_back(p);
      }
    }
  }
  return ProductSpaceInstance::uniform(2, n, set);
}

}  // namespace

TEST(Instance, Validation) {
  EXPECT_THROW(ProductSpaceInstance::uniform(2, 2, {}), EmptySet);
  EXPECT_THROW(ProductSpaceInstance::uniform(2, 2, {pt({0, 2})}), InvalidArgument);
  EXPECT_THROW(ProductSpaceInstance::uniform(2, 2, {pt({0})}), InvalidArgument);
  EXPECT_THROW(ProductSpaceInstance::uniform(2, 2, {pt({0, 1}), pt({0, 1})}), InvalidArgument);
  EXPECT_THROW(ProductSpaceInstance::create(2, 2, {0.5, 0.6}, {pt({0, 1})}), InvalidArgument);
  EXPECT_THROW(ProductSpaceInstance::uniform(2, 21, {Point(21, 0)}).require_exhaustive(), SizeLimitExceeded);
  const auto inst = ProductSpaceInstance::create(3, 2, {0.5, 0.25, 0.25}, {pt({0, 1}), pt({2, 2})});
  EXPECT_DOUBLE_EQ(inst.set_probability(), 0.125 + 0.0625);
  EXPECT_EQ(inst.point_at(5), pt({2, 1}));
}

TEST(HammingF, SpecExamples) {
  const auto c = zero_one(2);
  EXPECT_EQ(hamming_f(c, {pt({0, 1})}, pt({0, 1})), 0.0);
  EXPECT_EQ(hamming_f(c, {pt({0, 0})}, pt({1, 1})), 2.0);
  EXPECT_EQ(hamming_f(c, {pt({0, 0}), pt({1, 1})}, pt({0, 1})), 1.0);
  Eigen::MatrixXd bad = zero_one(2);
  bad(0, 0) = 1;
  EXPECT_THROW(hamming_f(bad, {pt({0})}, pt({0})), InvalidArgument);
  EXPECT_THROW(hamming_f(c, {}, pt({0})), EmptySet);
}

TEST(Patterns, SpecExamples) {
  EXPECT_EQ(pattern_generators({pt({0, 1}), pt({1, 1})}, pt({0, 1})), (std::vector<Pattern>{0}));
  EXPECT_EQ(pattern_generators({pt({0, 0}), pt({1, 1})}, pt({0, 1})), (std::vector<Pattern>{0b01, 0b10}));
  const auto g = pattern_generators({pt({0, 1, 0, 1, 0})}, pt({0, 0, 0, 0, 0}));
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(pattern_vector(g[0], 5), (Eigen::VectorXd(5) << 0, 1, 0, 1, 0).finished());
}

TEST(Patterns, PruningKeepsOnlyMinimalSets) {
  const auto g = pattern_generators({pt({1, 0, 0}), pt({1, 1, 0}), pt({0, 1, 1}), pt({1, 1, 1})}, pt({0, 0, 0}));
  EXPECT_EQ(g, (std::vector<Pattern>{0b001, 0b110}));
}

TEST(ConvexDistance, SpecExamples) {
  EXPECT_EQ(convex_distance({pt({0, 1})}, pt({0, 1})).value, 0.0);
  EXPECT_NEAR(convex_distance({pt({1, 1, 0, 1, 0})}, pt({0, 0, 0, 0, 0})).value, std::sqrt(3.0), 1e-12);
  const auto r = convex_distance({pt({0, 0}), pt({1, 1})}, pt({0, 1}));
  EXPECT_NEAR(r.value, 1 / std::sqrt(2.0), 1e-9);
  double total = 0;
  for (const auto& [p, w] : r.witness) total += w;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(ConvexDistance, MatchesHullOracle) {
  for (std::uint64_t s = 0; s < 25; ++s) {
    const auto inst = random_binary(s, 4);
    for (std::uint64_t i = 0; i < inst.space_size(); ++i) {
      const auto x = inst.point_at(i);
      EXPECT_NEAR(convex_distance(inst.set(), x).value, fc_oracle(inst.set(), x), 1e-8);
    }
  }
}

TEST(ConvexDistance, Properties) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto inst = random_binary(100 + s, 6);
    Eigen::MatrixXd c = zero_one(2);
    for (std::uint64_t i = 0; i < inst.space_size(); ++i) {
      const auto x = inst.point_at(i);
      const double fc = convex_distance(inst.set(), x).value;
      EXPECT_GE(fc, 0.0);
      EXPECT_LE(fc, std::sqrt(6.0) + 1e-12);
      EXPECT_EQ(fc == 0.0, inst.contains(x));
      // d_H / sqrt N <= f_c <= sqrt(d_H)
      const double hd = hamming_f(c, inst.set(), x);
      EXPECT_LE(fc, std::sqrt(hd) + 1e-9);
      EXPECT_GE(fc, hd / std::sqrt(6.0) - 1e-9);
    }
  }
}

TEST(ExpMoment, SpecExamples) {
  std::vector<Point> all;
  for (std::uint64_t i = 0; i < 8; ++i) all.push_back(pt({int(i & 1), int((i >> 1) & 1), int((i >> 2) & 1)}));
  const auto full = check_exp_moment(ProductSpaceInstance::uniform(2, 3, all));
  EXPECT_DOUBLE_EQ(full.lhs, 1.0);
  EXPECT_DOUBLE_EQ(full.rhs, 1.0);
  EXPECT_DOUBLE_EQ(full.margin, 0.0);
  const auto one = check_exp_moment(ProductSpaceInstance::uniform(2, 1, {pt({0})}));
  EXPECT_NEAR(one.lhs, 0.5 * (1 + std::exp(0.25)), 1e-12);
  EXPECT_DOUBLE_EQ(one.rhs, 2.0);
}

TEST(ExpMoment, EveryBinarySubsetOfFourFactors) {
  // all 2^16 - 1 nonempty subsets of {0,1}^4
  std::vector<Point> cube;
  for (std::uint64_t i = 0; i < 16; ++i)
    cube.push_back(pt({int(i & 1), int((i >> 1) & 1), int((i >> 2) & 1), int((i >> 3) & 1)}));
  double worst = 1e300;
  for (std::uint32_t mask = 1; mask < (1U << 16); ++mask) {
    std::vector<Point> a;
    for (std::size_t i = 0; i < 16; ++i)
      if ((mask >> i) & 1U) a.push_back(cube[i]);
    worst = std::min(worst, check_exp_moment(ProductSpaceInstance::uniform(2, 4, a)).margin);
  }
  EXPECT_GE(worst, -1e-9);
}

TEST(ExpMoment, NonUniformWeights) {
  Philox4x32 g(77, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const double w0 = 0.05 + 0.9 * g.uniform();
    std::vector<Point> a;
    for (std::uint64_t i = 0; i < 27; ++i)
      if (g.uniform() < 0.25) a.push_back(pt({int(i % 3), int(i / 3 % 3), int(i / 9)}));
    if (a.empty()) continue;
    const auto inst = ProductSpaceInstance::create(3, 3, {w0, (1 - w0) / 2, (1 - w0) / 2}, a);
    EXPECT_GE(check_exp_moment(inst).margin, -1e-9);
  }
}

TEST(Enlargement, SpecExamples) {
  const auto inst = ProductSpaceInstance::uniform(2, 4, {pt({0, 0, 0, 0})});
  const auto t0 = enlargement_measure(inst, 0.0);
  EXPECT_DOUBLE_EQ(t0.measure, inst.set_probability());
  EXPECT_DOUBLE_EQ(enlargement_measure(inst, 2.0).measure, 1.0);
  // f_c = sqrt(|S|) for a singleton, so A_1 is the point and its four neighbours
  const auto t1 = enlargement_measure(inst, 1.0);
  EXPECT_DOUBLE_EQ(t1.measure, 5.0 / 16.0);
  EXPECT_TRUE(t1.holds);
  EXPECT_NEAR(t1.corollary_bound, 1 - std::exp(-0.25) * 16, 1e-12);
  EXPECT_THROW(enlargement_measure(inst, -1.0), InvalidArgument);
}

TEST(Enlargement, MonotoneAndHolds) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto inst = random_binary(200 + s, 5);
    const auto table = convex_distance_table(inst);
    double prev = 0;
    for (double t = 0; t <= 2.5; t += 0.125) {
      const auto r = enlargement_measure(inst, table, t);
      EXPECT_TRUE(r.holds);
      EXPECT_GE(r.measure, prev);
      prev = r.measure;
    }
  }
}

TEST(DualCheck, SpecExamples) {
  const auto inst = ProductSpaceInstance::uniform(2, 2, {pt({0, 0}), pt({1, 1})});
  EXPECT_TRUE(dual_check(inst, pt({0, 0}), 0.3, 200, 1).ok);
  EXPECT_TRUE(dual_check(inst, pt({0, 1}), 0.5, 200, 1).ok);
  EXPECT_TRUE(dual_check(inst, pt({0, 1}), 1 / std::sqrt(2.0), 200, 1).ok);
  EXPECT_TRUE(dual_check(inst, pt({0, 1}), 1.0, 200, 1).ok);
}

TEST(DualCheck, RandomInstances) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto inst = random_binary(300 + s, 4);
    for (std::uint64_t i = 0; i < inst.space_size(); i += 3) {
      const auto x = inst.point_at(i);
      const double fc = convex_distance(inst.set(), x).value;
      for (double t : {0.5 * fc, fc, fc + 0.3}) {
        const auto r = dual_check(inst, x, t, 100, s);
        EXPECT_TRUE(r.ok) << r.counterexample;
      }
    }
  }
}

TEST(VectorSum, SpecExamples) {
  Eigen::MatrixXd one(1, 3);
  one << 1, -2, 0.5;
  const auto single = vector_sum_tail_check(one, VectorNorm::l2, BoundedLaw::rademacher, 1000, 1, {0.5, 1, 2});
  EXPECT_EQ(single.violations(), 0u);
  for (const auto& p : single.median_tail) EXPECT_EQ(p.empirical, 0.0);

  const auto basis = vector_sum_tail_check(Eigen::MatrixXd::Identity(100, 100), VectorNorm::l2,
                                           BoundedLaw::rademacher, 2000, 2, {0.5, 1});
  EXPECT_DOUBLE_EQ(basis.median, 10.0);
  EXPECT_NEAR(basis.scale, 1.0, 1e-12);
  for (const auto& p : basis.median_tail) EXPECT_EQ(p.empirical, 0.0);
}

TEST(VectorSum, RandomVectorsBelowBound) {
  Philox4x32 g(5, 0);
  Eigen::MatrixXd v(50, 5);
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = g.normal();
  for (auto norm : {VectorNorm::l2, VectorNorm::linf}) {
    for (auto law : {BoundedLaw::rademacher, BoundedLaw::uniform}) {
      const auto r = vector_sum_tail_check(v, norm, law, 100000, 9, {1, 2, 3, 4});
      EXPECT_EQ(r.violations(), 0u);
    }
  }
}

TEST(VectorSum, SigmaDefinitions) {
  Eigen::MatrixXd v(2, 2);
  v << 3, 0, 4, 0;
  EXPECT_NEAR(weak_variance_sigma(v, VectorNorm::l2), 5.0, 1e-12);
  EXPECT_NEAR(weak_variance_sigma(v, VectorNorm::linf), 5.0, 1e-12);
  v << 1, 0, 0, 1;
  EXPECT_NEAR(weak_variance_sigma(v, VectorNorm::l2), 1.0, 1e-12);
}

TEST(Sphere, BoundAndVacuousCases) {
  const auto r = sphere_tail_check(2, SphereFunctional::coordinate, 5000, 1, {0.0, 0.5});
  EXPECT_DOUBLE_EQ(r.median_tail[0].bound, 2.0);
  EXPECT_NEAR(r.median_tail[1].bound, 2 * std::exp(-0.25), 1e-15);
  EXPECT_EQ(r.violations(), 0u);
}

TEST(Sphere, CoordinateTailMatchesBetaMarginal) {
  const std::size_t trials = 200000;
  const auto r = sphere_tail_check(100, SphereFunctional::coordinate, trials, 3, {0.1, 0.2});
  EXPECT_NEAR(r.median, 0.0, 0.01);
  for (const auto& p : r.median_tail) {
    const double exact = oracle::sphere_coordinate_tail(100, p.parameter);
    EXPECT_NEAR(p.empirical, exact, 5 * std::sqrt(exact * (1 - exact) / trials) + 0.005);
  }
}

TEST(Sphere, DistanceFunctionalBelowBound) {
  const auto r = sphere_tail_check(100, SphereFunctional::distance_to_point, 100000, 4, {0.1, 0.2, 0.3});
  EXPECT_EQ(r.violations(), 0u);
}

TEST(Gauss, NormAtSixtyFour) {
  const auto r = gauss_tail_check(64, GaussFunctional::euclidean_norm, 100000, 5, {0.0, 3.0});
  EXPECT_EQ(r.asserted, Center::mean);
  EXPECT_DOUBLE_EQ(r.mean_tail[0].bound, 2.0);
  EXPECT_NEAR(r.mean_tail[1].bound, 2 * std::exp(-4.5), 1e-15);
  EXPECT_LT(r.mean_tail[1].empirical, r.mean_tail[1].bound);
  // the norm fluctuates like N(0, 1/2), so the tail is about 2 P(Z > 3 sqrt 2)
  EXPECT_LT(r.mean_tail[1].empirical, 2 * oracle::normal_upper_tail(3.0));
  EXPECT_NEAR(r.mean_tail[1].empirical, 2 * oracle::normal_upper_tail(3.0 * std::sqrt(2.0)), 5e-5);
  EXPECT_NEAR(r.mean, std::sqrt(63.5), 0.02);
}

TEST(Gauss, DimensionFree) {
  for (auto f : {GaussFunctional::euclidean_norm, GaussFunctional::max_coordinate, GaussFunctional::distance_to_point}) {
    for (std::size_t n : {2u, 64u, 512u}) {
      EXPECT_EQ(gauss_tail_check(n, f, 20000, 6, {1, 2, 3}).violations(), 0u);
    }
  }
}

TEST(Gauss, MaxCoordinateMeanMatchesQuadrature) {
  const auto r = gauss_tail_check(10, GaussFunctional::max_coordinate, 100000, 8, {1});
  EXPECT_NEAR(r.mean, oracle::expected_max_normals(10), 0.01);
}

TEST(TwoSmooth, BoundHolds) {
  for (double p : {2.0, 3.0, 4.0}) EXPECT_LE(two_smooth_check(p, 8, 100000, 11).max_violation, 1e-10);
  EXPECT_DOUBLE_EQ(two_smooth_check(4, 2, 10, 1).constant, 1.5);
  EXPECT_THROW(two_smooth_check(1.5, 3, 10, 1), DomainError);
}

TEST(TwoSmooth, LpNorm) {
  EXPECT_NEAR(lp_norm((Eigen::VectorXd(2) << 3, -4).finished(), 2), 5.0, 1e-14);
  EXPECT_NEAR(lp_norm((Eigen::VectorXd(2) << 1, 1).finished(), 4), std::pow(2.0, 0.25), 1e-14);
}
