#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "chainlab/errors.hpp"
#include "chainlab/rng.hpp"
#include "chainlab/transport.hpp"
#include "oracles.hpp"

using namespace chainlab;
using namespace chainlab::transport;

namespace {

DiscreteMeasure line(std::vector<double> x, std::vector<double> w) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 1);
  Eigen::VectorXd v(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < x.size(); ++i) a(static_cast<Eigen::Index>(i), 0) = x[i];
  for (std::size_t i = 0; i < w.size(); ++i) v(static_cast<Eigen::Index>(i)) = w[i];
  return DiscreteMeasure::create(a, v);
}

std::vector<double> random_weights(Philox4x32& g, std::size_t n) {
  std::vector<double> w(n);
  double s = 0;
  for (auto& x : w) s += (x = 0.05 + g.uniform());
  for (auto& x : w) x /= s;
  return w;
}

std::vector<double> random_atoms(Philox4x32& g, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i) + 0.9 * g.uniform();  // distinct
  return x;
}

}  // namespace

TEST(Measure, Validation) {
  EXPECT_THROW(line({0, 1}, {0.5, 0.6}), InvalidArgument);
  EXPECT_THROW(line({0, 0}, {0.5, 0.5}), InvalidArgument);
  EXPECT_THROW(line({0, 1}, {-0.5, 1.5}), InvalidArgument);
  EXPECT_THROW(line({0}, {1}).dilated(0), InvalidArgument);
}

TEST(KL, SpecExamples) {
  const auto nu = line({0, 1}, {0.5, 0.5});
  EXPECT_EQ(kl_divergence(nu, nu), 0.0);
  EXPECT_NEAR(kl_divergence(line({0}, {1}), nu), std::log(2.0), 1e-15);
  EXPECT_NEAR(kl_divergence(line({0, 1}, {0.75, 0.25}), nu), 0.75 * std::log(1.5) + 0.25 * std::log(0.5), 1e-15);
  EXPECT_NEAR(kl_divergence(line({0, 1}, {0.75, 0.25}), nu), 0.13081, 1e-5);
}

TEST(KL, ZeroMassAndSupport) {
  const auto nu = line({0, 1}, {0.5, 0.5});
  EXPECT_NEAR(kl_divergence(line({0, 1}, {1, 0}), nu), std::log(2.0), 1e-15);
  EXPECT_THROW(kl_divergence(line({2}, {1}), nu), AbsoluteContinuityError);
  EXPECT_THROW(kl_divergence(line({0, 1}, {0.5, 0.5}), line({0}, {1})), AbsoluteContinuityError);
}

TEST(KL, NonNegative) {
  Philox4x32 g(3, 0);
  for (int t = 0; t < 50; ++t) {
    const auto x = random_atoms(g, 6);
    EXPECT_GE(kl_divergence(line(x, random_weights(g, 6)), line(x, random_weights(g, 6))), 0.0);
  }
}

TEST(Transport, SpecExamples) {
  const auto mu = line({0, 1}, {0.5, 0.5});
  const auto same = transport_cost(mu, mu);
  EXPECT_EQ(same.value, 0.0);
  EXPECT_NEAR(same.plan(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(same.plan(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(transport_cost(line({0}, {1}), line({1.7}, {1})).value, 1.7 * 1.7, 1e-14);
  EXPECT_NEAR(transport_cost(mu, line({2, 3}, {0.5, 0.5})).value, 4.0, 1e-14);
}

TEST(Transport, MatchesMonotoneCoupling) {
  Philox4x32 g(11, 0);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 2 + t % 9, m = 3 + t % 7;
    const auto x = random_atoms(g, n), y = random_atoms(g, m);
    const auto a = random_weights(g, n), b = random_weights(g, m);
    const auto r = transport_cost(line(x, a), line(y, b));
    EXPECT_NEAR(r.value, oracle::monotone_transport(x, a, y, b), 1e-10);
    EXPECT_NEAR(r.plan.rowwise().sum().transpose()(0), a[0], 1e-12);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(r.plan.row(static_cast<Eigen::Index>(i)).sum(), a[i], 1e-12);
    for (std::size_t j = 0; j < m; ++j) EXPECT_NEAR(r.plan.col(static_cast<Eigen::Index>(j)).sum(), b[j], 1e-12);
    EXPECT_GE(r.plan.minCoeff(), -1e-15);
    EXPECT_LT(r.slackness_residual, 1e-9);
  }
}

TEST(Transport, SymmetryAndScaling) {
  Philox4x32 g(12, 0);
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd xa(5, 2), ya(4, 2);
    for (Eigen::Index i = 0; i < xa.size(); ++i) xa.data()[i] = g.normal();
    for (Eigen::Index i = 0; i < ya.size(); ++i) ya.data()[i] = g.normal();
    const auto wa = random_weights(g, 5), wb = random_weights(g, 4);
    const auto mu = DiscreteMeasure::create(xa, Eigen::Map<const Eigen::VectorXd>(wa.data(), 5));
    const auto nu = DiscreteMeasure::create(ya, Eigen::Map<const Eigen::VectorXd>(wb.data(), 4));
    const double c = transport_cost(mu, nu).value;
    EXPECT_NEAR(transport_cost(nu, mu).value, c, 1e-12);
    EXPECT_NEAR(transport_cost(mu.dilated(2.5), nu.dilated(2.5)).value, 6.25 * c, 1e-10);
  }
}

TEST(Transport, ExplicitCostAssignment) {
  // 3x3 uniform assignment problem; optimum found by listing all permutations
  Eigen::MatrixXd c(3, 3);
  c << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(3, 1.0 / 3);
  int perm[3] = {0, 1, 2};
  double best = 1e300;
  do {
    best = std::min(best, (c(0, perm[0]) + c(1, perm[1]) + c(2, perm[2])) / 3);
  } while (std::next_permutation(perm, perm + 3));
  EXPECT_NEAR(solve_transportation(w, w, c).value, best, 1e-14);
}

TEST(Transport, SizeLimit) {
  std::vector<double> x(kMaxTotalAtoms / 2 + 1);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  const std::vector<double> w(x.size(), 1.0 / static_cast<double>(x.size()));
  const auto mu = line(x, w);
  EXPECT_THROW(transport_cost(mu, mu), SizeLimitExceeded);
}

TEST(Discretize, SpecExamples) {
  const auto big = discretize_gaussian(401, 8);
  const auto& x = big.atoms();
  const auto& w = big.weights();
  for (Eigen::Index i = 0; i < 200; ++i) EXPECT_DOUBLE_EQ(w(i), w(400 - i));
  const double mean = (x.col(0).array() * w.array()).sum();
  const double var = (x.col(0).array().square() * w.array()).sum() - mean * mean;
  EXPECT_LT(std::abs(mean), 1e-12);
  EXPECT_NEAR(var, 1.0, 1e-4);
  const auto small = discretize_gaussian(41, 6);
  EXPECT_NEAR((small.atoms().col(0).array().square() * small.weights().array()).sum(), 1.0, 5e-3);
  EXPECT_THROW(discretize_gaussian(40, 8), InvalidArgument);
  EXPECT_THROW(discretize_gaussian(41, 5), InvalidArgument);
}

TEST(T2, ConstantDensityIsZero) {
  const std::vector<double> f(101, 1.0);
  const auto r = t2_check(f, 101, 6);
  EXPECT_NEAR(r.transport, 0.0, 1e-14);
  EXPECT_NEAR(r.bound, 0.0, 1e-14);
}

TEST(T2, ShiftedGaussianIsNearEquality) {
  const std::size_t m = 401;
  const double L = 8, a = 0.5;
  std::vector<double> f(m);
  for (std::size_t i = 0; i < m; ++i) f[i] = std::exp(a * (-L + 2 * L * static_cast<double>(i) / (m - 1)));
  const auto r = t2_check(f, m, L);
  EXPECT_NEAR(r.transport, a * a, 1e-3);
  EXPECT_NEAR(r.bound, a * a, 1e-3);
  EXPECT_GE(r.margin, -1e-3);
}

TEST(T2, RandomPerturbations) {
  const std::size_t m = 201;
  const double L = 8, h = 2 * L / (m - 1);
  Philox4x32 g(21, 0);
  for (int s = 0; s < 10; ++s) {
    const double b = 0.4 * (2 * g.uniform() - 1), c = g.uniform(), w = 0.5 + 2 * g.uniform();
    std::vector<double> f(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double x = -L + h * static_cast<double>(i);
      f[i] = std::exp(b * x + c * std::cos(w * x));
    }
    EXPECT_GE(t2_check(f, m, L).margin, -1e-3 - h * h / 6);
  }
}
