#include "chainlab/chaining.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "chainlab/errors.hpp"
#include "chainlab/parallel.hpp"

namespace chainlab::chaining {

namespace {

double sqrt_log2(std::size_t count) { return std::sqrt(std::log2(static_cast<double>(count))); }

std::size_t nearest_member(const metric::FiniteMetricSpace& space, std::size_t t,
                           const std::vector<std::size_t>& set) {
  std::size_t best = set.front();
  for (std::size_t s : set) {
    const double ds = space(t, s);
    const double db = space(t, best);
    if (ds < db || (ds == db && s < best)) best = s;
  }
  return best;
}

// Sampling noise floor when comparing sup_t (X_t - X_t0) against u S.
constexpr double kTailComparisonSlack = 1e-12;

}  // namespace

double dudley_integral(const metric::EntropyProfile& profile) {
  double area = 0.0;
  double left = 0.0;
  for (std::size_t j = 0; j < profile.breakpoints.size(); ++j) {
    area += (profile.breakpoints[j] - left) * sqrt_log2(profile.counts[j]);
    left = profile.breakpoints[j];
  }
  return area;
}

double sudakov_bound(const metric::EntropyProfile& profile) {
  double best = 0.0;
  for (std::size_t j = 0; j < profile.breakpoints.size(); ++j)
    best = std::max(best, profile.breakpoints[j] * sqrt_log2(profile.counts[j]));
  return best;
}

std::size_t admissible_cap(std::size_t k) noexcept {
  if (k == 0) return 1;
  if (k >= 6) return std::numeric_limits<std::size_t>::max();
  return std::size_t{1} << (std::size_t{1} << k);
}

void check_admissible(const AdmissibleSequence& seq, std::size_t n) {
  if (seq.sets.empty()) throw AdmissibilityViolation("admissible sequence is empty");
  if (seq.sets.front().size() != 1) throw AdmissibilityViolation("|T_0| must be 1");
  for (std::size_t k = 0; k < seq.sets.size(); ++k) {
    const auto& set = seq.sets[k];
    if (set.empty()) throw AdmissibilityViolation("T_" + std::to_string(k) + " is empty");
    if (set.size() > admissible_cap(k))
      throw AdmissibilityViolation("|T_" + std::to_string(k) + "| exceeds 2^(2^k)");
    std::vector<std::size_t> sorted = set;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw AdmissibilityViolation("T_" + std::to_string(k) + " has repeated members");
    if (sorted.back() >= n) throw AdmissibilityViolation("member index out of range");
  }
  if (seq.sets.back().size() != n)
    throw AdmissibilityViolation("final set of the sequence must be the whole space");
}

AdmissibleSequence greedy_admissible_sequence(const metric::FiniteMetricSpace& space) {
  const std::size_t n = space.size();
  std::size_t root = 0;
  double best_ecc = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double ecc = 0.0;
    for (std::size_t j = 0; j < n; ++j) ecc = std::max(ecc, space(i, j));
    if (ecc < best_ecc) {
      best_ecc = ecc;
      root = i;
    }
  }

  std::vector<std::size_t> order{root};
  std::vector<double> gap(n);
  std::vector<bool> taken(n, false);
  taken[root] = true;
  for (std::size_t j = 0; j < n; ++j) gap[j] = space(root, j);
  while (order.size() < n) {
    std::size_t far = n;
    for (std::size_t j = 0; j < n; ++j)
      if (!taken[j] && (far == n || gap[j] > gap[far])) far = j;
    taken[far] = true;
    order.push_back(far);
    for (std::size_t j = 0; j < n; ++j) gap[j] = std::min(gap[j], space(far, j));
  }

  AdmissibleSequence seq;
  for (std::size_t k = 0;; ++k) {
    const std::size_t size = std::min(n, admissible_cap(k));
    seq.sets.emplace_back(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(size));
    if (size == n) break;
  }
  return seq;
}

double gamma2_value(const metric::FiniteMetricSpace& space, const AdmissibleSequence& seq) {
  check_admissible(seq, space.size());
  double sup = 0.0;
  for (std::size_t t = 0; t < space.size(); ++t) {
    double sum = 0.0;
    for (std::size_t k = 0; k < seq.sets.size(); ++k)
      sum += std::pow(2.0, 0.5 * static_cast<double>(k)) * space.distance_to_set(t, seq.sets[k]);
    sup = std::max(sup, sum);
  }
  return sup;
}

double gamma2_sum_of_sups(const metric::FiniteMetricSpace& space, const AdmissibleSequence& seq) {
  check_admissible(seq, space.size());
  double total = 0.0;
  for (std::size_t k = 0; k < seq.sets.size(); ++k) {
    double sup = 0.0;
    for (std::size_t t = 0; t < space.size(); ++t)
      sup = std::max(sup, space.distance_to_set(t, seq.sets[k]));
    total += std::pow(2.0, 0.5 * static_cast<double>(k)) * sup;
  }
  return total;
}

double gamma2_exact_small(const metric::FiniteMetricSpace& space) {
  const std::size_t n = space.size();
  if (n > kExactGamma2MaxPoints)
    throw SizeLimitExceeded("exact gamma2", n, kExactGamma2MaxPoints);

  // Distance of every point to every candidate T_1 (nonempty, at most 4 members).
  const std::size_t cap1 = std::min<std::size_t>(n, admissible_cap(1));
  std::vector<std::vector<double>> to_t1;
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > cap1) continue;
    std::vector<double> d(n, std::numeric_limits<double>::infinity());
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t s = 0; s < n; ++s)
        if ((mask >> s) & 1U) d[t] = std::min(d[t], space(t, s));
    to_t1.push_back(std::move(d));
  }

  const auto per_root = parallel_map(n, [&](std::size_t root) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& d1 : to_t1) {
      double sup = 0.0;
      for (std::size_t t = 0; t < n && sup < best; ++t)
        sup = std::max(sup, space(t, root) + std::numbers::sqrt2 * d1[t]);
      best = std::min(best, sup);
    }
    return best;
  });
  return *std::min_element(per_root.begin(), per_root.end());
}

OmegaSeries omega_series_bound(double u) {
  if (!(u >= kOmegaMinU)) throw DomainError("omega_series_bound requires u >= 4");
  const double u2 = u * u;
  OmegaSeries out;
  for (std::size_t k = 1; k < 63; ++k) {
    const double pk = std::ldexp(1.0, static_cast<int>(k));  // 2^k
    const double log_term = 2.0 * pk * std::numbers::ln2 - u2 * 0.5 * pk;
    const double scaled = std::exp(log_term + u2);
    const double raw = std::exp(log_term);
    out.terms = k;
    out.ratio += scaled;
    out.series += raw;
    if (scaled <= out.ratio * 1e-20 || raw == 0.0) break;
  }
  return out;
}

double ChainTail::tail_bound(double u) const {
  if (u < kOmegaMinU) return 1.0;
  return std::min(1.0, omega_series_bound(u).series);
}

ChainTail chain_tail_functional(const metric::FiniteMetricSpace& space,
                                const AdmissibleSequence& seq) {
  check_admissible(seq, space.size());
  const std::size_t n = space.size();
  ChainTail out;
  out.root = seq.sets.front().front();
  out.projection.resize(seq.sets.size(), std::vector<std::size_t>(n));
  for (std::size_t k = 0; k < seq.sets.size(); ++k)
    for (std::size_t t = 0; t < n; ++t) out.projection[k][t] = nearest_member(space, t, seq.sets[k]);

  for (std::size_t t = 0; t < n; ++t) {
    double sum = 0.0;
    for (std::size_t k = 1; k < seq.sets.size(); ++k)
      sum += std::pow(2.0, 0.5 * static_cast<double>(k)) *
             space(out.projection[k][t], out.projection[k - 1][t]);
    out.S = std::max(out.S, sum);
  }
  return out;
}

double ChainingReport::ratio_gamma2() const noexcept { return esup_mc.mean / gamma2_greedy; }
double ChainingReport::ratio_dudley() const noexcept { return esup_mc.mean / dudley; }
double ChainingReport::ratio_sudakov() const noexcept { return esup_mc.mean / sudakov; }

ChainingReport sandwich_report(const gp::GaussianProcessSpec& spec, std::size_t n_samples,
                               std::uint64_t seed, const std::vector<double>& tail_us) {
  if (n_samples < 100) throw InvalidArgument("sandwich_report needs at least 100 samples");
  const auto space = gp::canonical_metric(spec);
  const std::size_t n = space.size();

  ChainingReport report;
  report.entropy_mode =
      n <= metric::kExactCoverMaxPoints ? metric::CoverMode::exact : metric::CoverMode::greedy;
  const auto profile = metric::entropy_profile(space, report.entropy_mode);
  report.sudakov = sudakov_bound(profile);
  report.dudley = dudley_integral(profile);

  const auto seq = greedy_admissible_sequence(space);
  report.gamma2_greedy = gamma2_value(space, seq);
  if (n <= kExactGamma2MaxPoints) report.gamma2_exact = gamma2_exact_small(space);

  const ChainTail chain = chain_tail_functional(space, seq);
  report.S = chain.S;

  const gp::PathSampler sampler(spec);
  const auto root = static_cast<Eigen::Index>(chain.root);
  const double slack = kTailComparisonSlack * (1.0 + space.diameter());
  struct BlockStats {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::vector<std::size_t> exceed;
  };
  const auto blocks = parallel_map(gp::PathSampler::block_count(n_samples), [&](std::size_t b) {
    const Eigen::MatrixXd x =
        sampler.block(seed, b, gp::PathSampler::rows_in_block(n_samples, b));
    BlockStats s;
    s.exceed.assign(tail_us.size(), 0);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double top = x.row(r).maxCoeff();
      s.sum += top;
      s.sum_sq += top * top;
      const double displacement = top - x(r, root);
      for (std::size_t k = 0; k < tail_us.size(); ++k)
        if (displacement - tail_us[k] * chain.S > slack) ++s.exceed[k];
    }
    return s;
  });

  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<std::size_t> exceed(tail_us.size(), 0);
  for (const auto& s : blocks) {
    sum += s.sum;
    sum_sq += s.sum_sq;
    for (std::size_t k = 0; k < tail_us.size(); ++k) exceed[k] += s.exceed[k];
  }
  report.esup_mc = gp::make_esup_estimate(sum, sum_sq, n_samples);
  for (std::size_t k = 0; k < tail_us.size(); ++k) {
    const double u = tail_us[k];
    report.chain_tail.push_back(
        {u, u * chain.S, make_tail_point(u, exceed[k], n_samples, chain.tail_bound(u))});
  }
  return report;
}

}  // namespace chainlab::chaining
