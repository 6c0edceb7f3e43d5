#include <gtest/gtest.h>

#include <cmath>

#include "chainlab/errors.hpp"
#include "chainlab/gp.hpp"
#include "chainlab/parallel.hpp"
#include "oracles.hpp"

using namespace chainlab;
using namespace chainlab::gp;

namespace {

Eigen::MatrixXd cov2(double a, double b, double c) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, b, c;
  return m;
}

}  // namespace

TEST(CanonicalMetric, SpecExamples) {
  EXPECT_NEAR(canonical_metric(GaussianProcessSpec::from_covariance(Eigen::MatrixXd::Identity(2, 2)))(0, 1),
              std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(canonical_metric(GaussianProcessSpec::from_covariance(Eigen::MatrixXd::Ones(2, 2)))(0, 1), 0.0,
              1e-15);
  EXPECT_NEAR(canonical_metric(GaussianProcessSpec::from_covariance(cov2(1, 0.5, 2)))(0, 1), std::sqrt(2.0),
              1e-15);
}

TEST(CanonicalMetric, EmbeddingIsEuclideanAndTranslationInvariant) {
  Eigen::MatrixXd p(4, 3);
  p << 0, 0, 0, 1, 2, 3, -1, 0.5, 2, 4, 4, 4;
  const auto d = canonical_metric(GaussianProcessSpec::from_embedding(p));
  const auto via_cov = canonical_metric(GaussianProcessSpec::from_covariance(p * p.transpose()));
  Eigen::MatrixXd shifted = p.rowwise() + Eigen::RowVector3d(10, -3, 7);
  const auto d2 = canonical_metric(GaussianProcessSpec::from_embedding(shifted));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const double e = (p.row(static_cast<Eigen::Index>(i)) - p.row(static_cast<Eigen::Index>(j))).norm();
      EXPECT_NEAR(d(i, j), e, 1e-12 * (1 + e));
      EXPECT_NEAR(via_cov(i, j), e, 1e-9 * (1 + e));
      EXPECT_NEAR(d2(i, j), e, 1e-12 * (1 + e));
    }
}

TEST(GaussianProcessSpec, RejectsBadCovariance) {
  EXPECT_THROW(GaussianProcessSpec::from_covariance(cov2(1, 2, 1)), DegenerateCovariance);
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.1, 0.2, 1;
  EXPECT_THROW(GaussianProcessSpec::from_covariance(asym), Error);
  EXPECT_THROW(GaussianProcessSpec::from_embedding(Eigen::MatrixXd(0, 2)), Error);
}

TEST(SamplePaths, ZeroCovarianceGivesZeros) {
  const auto x = sample_paths(GaussianProcessSpec::from_covariance(Eigen::MatrixXd::Zero(3, 3)), 50, 1);
  EXPECT_EQ(x.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SamplePaths, IdentityVarianceBand) {
  const auto x = sample_paths(GaussianProcessSpec::from_covariance(Eigen::MatrixXd::Identity(4, 4)), 100000, 3);
  for (Eigen::Index j = 0; j < 4; ++j) {
    const double m = x.col(j).mean();
    const double v = (x.col(j).array() - m).square().sum() / (x.rows() - 1);
    EXPECT_GE(v, 0.98);
    EXPECT_LE(v, 1.02);
  }
}

TEST(SamplePaths, CovarianceReproduced) {
  Eigen::MatrixXd c(3, 3);
  c << 2, 0.5, -0.3, 0.5, 1, 0.2, -0.3, 0.2, 0.5;
  const auto x = sample_paths(GaussianProcessSpec::from_covariance(c), 200000, 4);
  const Eigen::MatrixXd emp = x.transpose() * x / static_cast<double>(x.rows());
  EXPECT_LT((emp - c).cwiseAbs().maxCoeff(), 0.03);
}

TEST(SamplePaths, DeterministicAcrossWorkersAndPrefixStable) {
  const auto spec = GaussianProcessSpec::from_covariance(Eigen::MatrixXd::Identity(5, 5));
  set_worker_count(1);
  const auto a = sample_paths(spec, 10000, 77);
  set_worker_count(4);
  const auto b = sample_paths(spec, 10000, 77);
  const auto c = sample_paths(spec, 5000, 77);
  set_worker_count(0);
  EXPECT_TRUE(a == b);
  EXPECT_TRUE(a.topRows(5000) == c);
}

TEST(SamplePaths, SingularCovarianceHandled) {
  // rank one: X_1 = X_0
  const auto x = sample_paths(GaussianProcessSpec::from_covariance(Eigen::MatrixXd::Ones(2, 2)), 1000, 5);
  EXPECT_LT((x.col(0) - x.col(1)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(EstimateEsup, SingleVariableCentered) {
  const auto e = estimate_esup(GaussianProcessSpec::from_covariance(Eigen::MatrixXd::Identity(1, 1)), 20000, 1);
  EXPECT_LT(std::abs(e.mean), 3 * e.std_error);
  EXPECT_EQ(e.n_samples, 20000u);
  EXPECT_LT(e.confidence_95.first, e.mean);
  EXPECT_GT(e.confidence_95.second, e.mean);
}

TEST(EstimateEsup, TwoIndependentNormals) {
  const double exact = oracle::expected_max_normals(2);
  EXPECT_NEAR(exact, 1.0 / std::sqrt(M_PI), 1e-9);
  const auto e = estimate_esup(GaussianProcessSpec::from_covariance(Eigen::MatrixXd::Identity(2, 2)), 200000, 2);
  EXPECT_LT(std::abs(e.mean - exact), 4 * e.std_error);
}

TEST(EstimateEsup, AntipodalPair) {
  Eigen::MatrixXd p(2, 1);
  p << 1, -1;
  const double exact = oracle::gauss_expect([](double x) { return std::abs(x); });
  EXPECT_NEAR(exact, std::sqrt(2.0 / M_PI), 1e-9);
  const auto e = estimate_esup(GaussianProcessSpec::from_embedding(p), 200000, 3);
  EXPECT_LT(std::abs(e.mean - exact), 4 * e.std_error);
}

TEST(EstimateEsup, ScalingIsExact) {
  Eigen::MatrixXd p(3, 2);
  p << 1, 0, 0.3, 0.8, -0.5, 0.2;
  const auto a = estimate_esup(GaussianProcessSpec::from_embedding(p), 5000, 9);
  const auto b = estimate_esup(GaussianProcessSpec::from_embedding(4.0 * p), 5000, 9);
  EXPECT_NEAR(b.mean, 4.0 * a.mean, 1e-12 * std::abs(b.mean) + 1e-14);
}

TEST(EstimateEsup, MaximumConcentrates) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(8, 8) * 0.7 + Eigen::MatrixXd::Ones(8, 8) * 0.3;
  const auto spec = GaussianProcessSpec::from_covariance(c);
  const auto e = estimate_esup(spec, 100000, 10);
  const double sd = e.std_error * std::sqrt(100000.0);
  EXPECT_LE(sd, 1.05 * 1.0);
}

TEST(EstimateEsup, NeedsEnoughSamples) {
  EXPECT_THROW(estimate_esup(GaussianProcessSpec::from_covariance(Eigen::MatrixXd::Identity(2, 2)), 99, 1),
               InvalidArgument);
}

TEST(PairwiseTail, SpecExamples) {
  const auto spec = GaussianProcessSpec::from_covariance(Eigen::MatrixXd::Identity(2, 2));
  const auto r = pairwise_tail_check(spec, {{0, 1}}, {0.0, 2.0, 50.0}, 200000, 5);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_DOUBLE_EQ(r[0].tail.bound, 1.0);
  EXPECT_FALSE(r[0].tail.violation);
  EXPECT_NEAR(r[1].tail.bound, std::exp(-1.0), 1e-15);
  EXPECT_NEAR(r[1].tail.empirical, oracle::normal_upper_tail(2.0 / std::sqrt(2.0)), 4 * r[1].tail.stderr_ + 1e-3);
  EXPECT_EQ(r[2].tail.empirical, 0.0);
  EXPECT_NEAR(r[1].distance, std::sqrt(2.0), 1e-15);
}

TEST(PairwiseTail, ZeroDistancePairRejected) {
  const auto spec = GaussianProcessSpec::from_covariance(Eigen::MatrixXd::Ones(2, 2));
  EXPECT_THROW(pairwise_tail_check(spec, {{0, 1}}, {1.0}, 1000, 1), ZeroDistancePair);
}
