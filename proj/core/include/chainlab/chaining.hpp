#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "chainlab/gp.hpp"
#include "chainlab/metric.hpp"
#include "chainlab/stats.hpp"

namespace chainlab::chaining {

/// Largest space on which gamma2_exact_small runs.
inline constexpr std::size_t kExactGamma2MaxPoints = 12;

/// Smallest u accepted by omega_series_bound.
inline constexpr double kOmegaMinU = 4.0;

/// sum_j (interval length) * sqrt(log2 N) over the profile; exact for a step profile.
double dudley_integral(const metric::EntropyProfile& profile);

/// max over breakpoints b of b * sqrt(log2 N(b-)), using the left-limit count.
/// No absolute constant is applied.
double sudakov_bound(const metric::EntropyProfile& profile);

/// Sets T_0, T_1, ..., T_K with |T_0| = 1, |T_k| <= 2^(2^k) and T_K = T.
/// Nesting is not required.
struct AdmissibleSequence {
  std::vector<std::vector<std::size_t>> sets;
};

/// 1 for k = 0, else 2^(2^k) saturating at SIZE_MAX.
std::size_t admissible_cap(std::size_t k) noexcept;

/// Throws AdmissibilityViolation if seq is not admissible over a space of n points.
void check_admissible(const AdmissibleSequence& seq, std::size_t n);

/// T_0 = the point of smallest eccentricity; T_k = first min(n, 2^(2^k))
/// points of a farthest-point traversal started at T_0.
AdmissibleSequence greedy_admissible_sequence(const metric::FiniteMetricSpace& space);

/// sup_t sum_k 2^(k/2) d(t, T_k), an upper bound on gamma_2(T, d).
double gamma2_value(const metric::FiniteMetricSpace& space, const AdmissibleSequence& seq);

/// sum_k 2^(k/2) sup_t d(t, T_k); always >= gamma2_value for the same sequence.
double gamma2_sum_of_sups(const metric::FiniteMetricSpace& space, const AdmissibleSequence& seq);

/// Exact gamma_2 for n <= 12 by exhaustive search over T_0 and |T_1| <= 4
/// (T_2 = T closes the sum).
double gamma2_exact_small(const metric::FiniteMetricSpace& space);

struct OmegaSeries {
  double series = 0.0;  // sum_k 2^(2^(k+1)) exp(-u^2 2^(k-1))
  double ratio = 0.0;   // series / exp(-u^2)
  std::size_t terms = 0;
};

/// Union bound over chain links; requires u >= 4 (DomainError otherwise).
OmegaSeries omega_series_bound(double u);

/// Chain quantities for a fixed admissible sequence.
struct ChainTail {
  double S = 0.0;                                   // sup_t sum_{k>=1} 2^(k/2) d(pi_k t, pi_{k-1} t)
  std::size_t root = 0;                             // t_0, the single element of T_0
  std::vector<std::vector<std::size_t>> projection; // projection[k][t] = pi_k(t)

  /// min(1, ratio(u) e^{-u^2}) for u >= 4, and 1 below that.
  double tail_bound(double u) const;
};

/// pi_k uses nearest member with lowest-index tie breaking.
ChainTail chain_tail_functional(const metric::FiniteMetricSpace& space,
                                const AdmissibleSequence& seq);

struct ChainTailRecord {
  double u = 0.0;
  double threshold = 0.0;  // u * S
  TailPoint tail;          // empirical P[sup_t (X_t - X_t0) > u S] vs tail_bound(u)
};

struct ChainingReport {
  gp::EsupEstimate esup_mc;
  metric::CoverMode entropy_mode = metric::CoverMode::exact;
  double sudakov = 0.0;
  double dudley = 0.0;
  double gamma2_greedy = 0.0;
  std::optional<double> gamma2_exact;
  double S = 0.0;
  std::vector<ChainTailRecord> chain_tail;

  double ratio_gamma2() const noexcept;   // esup / gamma2_greedy (NaN if 0/0)
  double ratio_dudley() const noexcept;   // esup / dudley
  double ratio_sudakov() const noexcept;  // esup / sudakov
};

/// All entropy and chaining functionals on the canonical metric, plus the
/// Monte Carlo estimate of E sup and the empirical chaining tails at tail_us,
/// computed from a single pass over the samples.
ChainingReport sandwich_report(const gp::GaussianProcessSpec& spec, std::size_t n_samples,
                               std::uint64_t seed, const std::vector<double>& tail_us = {4, 5, 6});

}  // namespace chainlab::chaining
