#include "chainlab/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chainlab/errors.hpp"
#include "chainlab/parallel.hpp"
#include "chainlab/rng.hpp"

namespace chainlab::gp {

namespace {

constexpr double kPsdTolerance = 1e-8;
constexpr double kSquaredDistanceFloor = -1e-9;
constexpr int kJitterEscalations = 3;

// Symmetric square root of cov, escalating a diagonal jitter on failure.
Eigen::MatrixXd symmetric_root(const Eigen::MatrixXd& cov, double& jitter_used) {
  const Eigen::Index n = cov.rows();
  const double base = 1e-12 * std::max(cov.trace(), 0.0) / static_cast<double>(n);
  double jitter = 0.0;
  for (int attempt = 0; attempt <= kJitterEscalations; ++attempt) {
    Eigen::MatrixXd work = cov;
    work.diagonal().array() += jitter;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(work);
    if (es.info() == Eigen::Success) {
      const Eigen::VectorXd& lambda = es.eigenvalues();
      const double top = std::max(lambda.maxCoeff(), 0.0);
      const double slack = 64.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * top;
      if (lambda.minCoeff() >= -slack) {
        jitter_used = jitter;
        const Eigen::VectorXd root = lambda.cwiseMax(0.0).cwiseSqrt();
        return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
      }
    }
    jitter = attempt == 0 ? base : jitter * 10.0;
  }
  throw FactorizationFailure("covariance factorization failed after jitter escalation");
}

}  // namespace

GaussianProcessSpec GaussianProcessSpec::from_covariance(Eigen::MatrixXd cov) {
  if (cov.rows() == 0 || cov.rows() != cov.cols())
    throw InvalidArgument("covariance must be a nonempty square matrix");
  if (!cov.allFinite()) throw InvalidArgument("covariance has non-finite entries");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument("covariance must be symmetric");
  Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw DegenerateCovariance("eigenvalue computation failed");
  const double top = es.eigenvalues().maxCoeff();
  const double bottom = es.eigenvalues().minCoeff();
  if (bottom < -kPsdTolerance * std::max(top, 0.0) || (top <= 0.0 && bottom < 0.0))
    throw DegenerateCovariance("covariance is not positive semidefinite");
  return GaussianProcessSpec(Kind::covariance, std::move(sym));
}

GaussianProcessSpec GaussianProcessSpec::from_embedding(Eigen::MatrixXd points) {
  if (points.rows() == 0 || points.cols() == 0)
    throw InvalidArgument("embedding needs at least one point and one dimension");
  if (!points.allFinite()) throw InvalidArgument("embedding has non-finite entries");
  return GaussianProcessSpec(Kind::embedding, std::move(points));
}

Eigen::MatrixXd GaussianProcessSpec::covariance() const {
  if (kind_ == Kind::covariance) return data_;
  return data_ * data_.transpose();
}

metric::FiniteMetricSpace canonical_metric(const GaussianProcessSpec& spec) {
  if (spec.kind() == GaussianProcessSpec::Kind::embedding)
    return metric::euclidean_space(spec.data());

  const Eigen::MatrixXd& cov = spec.data();
  const Eigen::Index n = cov.rows();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index s = 0; s < n; ++s)
    for (Eigen::Index t = s + 1; t < n; ++t) {
      const double sq = cov(s, s) + cov(t, t) - 2.0 * cov(s, t);
      if (sq < kSquaredDistanceFloor)
        throw DegenerateCovariance("negative squared canonical distance; covariance is not PSD");
      dist(s, t) = dist(t, s) = std::sqrt(std::max(sq, 0.0));
    }
  return metric::validate_metric(dist);
}

PathSampler::PathSampler(const GaussianProcessSpec& spec) {
  if (spec.kind() == GaussianProcessSpec::Kind::embedding) {
    factor_ = spec.data();
  } else {
    factor_ = symmetric_root(spec.data(), jitter_);
  }
}

Eigen::MatrixXd PathSampler::block(std::uint64_t seed, std::size_t block_index,
                                   std::size_t rows) const {
  Philox4x32 rng(seed, block_index);
  const Eigen::Index m = factor_.cols();
  Eigen::MatrixXd gauss(static_cast<Eigen::Index>(rows), m);
  for (Eigen::Index r = 0; r < gauss.rows(); ++r)
    for (Eigen::Index k = 0; k < m; ++k) gauss(r, k) = rng.normal();
  return gauss * factor_.transpose();
}

Eigen::MatrixXd sample_paths(const GaussianProcessSpec& spec, std::size_t n_samples,
                             std::uint64_t seed) {
  if (n_samples == 0) throw InvalidArgument("n_samples must be at least 1");
  const PathSampler sampler(spec);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n_samples), static_cast<Eigen::Index>(spec.size()));
  parallel_for(PathSampler::block_count(n_samples), [&](std::size_t b) {
    const std::size_t rows = PathSampler::rows_in_block(n_samples, b);
    out.middleRows(static_cast<Eigen::Index>(b * kSampleBlockRows), static_cast<Eigen::Index>(rows)) =
        sampler.block(seed, b, rows);
  });
  return out;
}

EsupEstimate make_esup_estimate(double sum, double sum_sq, std::size_t n) {
  EsupEstimate est;
  est.n_samples = n;
  const double dn = static_cast<double>(n);
  est.mean = sum / dn;
  const double var = n > 1 ? std::max(0.0, (sum_sq - dn * est.mean * est.mean) / (dn - 1.0)) : 0.0;
  est.std_error = std::sqrt(var / dn);
  est.confidence_95 = {est.mean - 1.96 * est.std_error, est.mean + 1.96 * est.std_error};
  return est;
}

EsupEstimate estimate_esup(const GaussianProcessSpec& spec, std::size_t n_samples,
                           std::uint64_t seed) {
  if (n_samples < 100) throw InvalidArgument("estimate_esup needs at least 100 samples");
  const PathSampler sampler(spec);
  struct Sums {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  const auto blocks = parallel_map(PathSampler::block_count(n_samples), [&](std::size_t b) {
    const Eigen::MatrixXd x = sampler.block(seed, b, PathSampler::rows_in_block(n_samples, b));
    Sums s;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double m = x.row(r).maxCoeff();
      s.sum += m;
      s.sum_sq += m * m;
    }
    return s;
  });
  Sums total;
  for (const Sums& s : blocks) {
    total.sum += s.sum;
    total.sum_sq += s.sum_sq;
  }
  return make_esup_estimate(total.sum, total.sum_sq, n_samples);
}

std::vector<PairTailRecord> pairwise_tail_check(
    const GaussianProcessSpec& spec, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    const std::vector<double>& lambdas, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw InvalidArgument("n_samples must be at least 1");
  const auto space = canonical_metric(spec);
  for (const auto& [a, b] : pairs) {
    if (a >= spec.size() || b >= spec.size()) throw InvalidArgument("pair index out of range");
    if (space(a, b) <= 0.0) throw ZeroDistancePair(a, b);
  }

  const PathSampler sampler(spec);
  const std::size_t n_lambda = lambdas.size();
  const auto blocks = parallel_map(PathSampler::block_count(n_samples), [&](std::size_t b) {
    const Eigen::MatrixXd x = sampler.block(seed, b, PathSampler::rows_in_block(n_samples, b));
    std::vector<std::size_t> counts(pairs.size() * n_lambda, 0);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const double inc = x(r, static_cast<Eigen::Index>(pairs[p].first)) -
                           x(r, static_cast<Eigen::Index>(pairs[p].second));
        for (std::size_t l = 0; l < n_lambda; ++l)
          if (inc > lambdas[l]) ++counts[p * n_lambda + l];
      }
    return counts;
  });

  std::vector<PairTailRecord> out;
  out.reserve(pairs.size() * n_lambda);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double d = space(pairs[p].first, pairs[p].second);
    for (std::size_t l = 0; l < n_lambda; ++l) {
      std::size_t hits = 0;
      for (const auto& c : blocks) hits += c[p * n_lambda + l];
      const double lambda = lambdas[l];
      const double bound = lambda <= 0.0 ? 1.0 : std::exp(-lambda * lambda / (2.0 * d * d));
      out.push_back({pairs[p].first, pairs[p].second, d,
                     make_tail_point(lambda, hits, n_samples, bound)});
    }
  }
  return out;
}

}  // namespace chainlab::gp
