#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace chainlab::spinglass {

/// Largest system handled by exact enumeration.
inline constexpr std::size_t kMaxExactSpins = 24;

/// Sherrington-Kirkpatrick instance:
///   H(sigma) = -(1/sqrt N) sum_{i<j} g_ij sigma_i sigma_j - h sum_i sigma_i.
/// Couplings are stored row by row: (0,1), (0,2), ..., (0,N-1), (1,2), ...
class SKInstance {
 public:
  SKInstance(std::size_t n_spins, std::vector<double> couplings, double field);

  /// Couplings drawn i.i.d. standard normal from stream (seed, disorder_index).
  static SKInstance random(std::size_t n_spins, double field, std::uint64_t seed,
                           std::uint64_t disorder_index);

  std::size_t size() const noexcept { return n_; }
  double field() const noexcept { return h_; }
  const std::vector<double>& couplings() const noexcept { return g_; }
  double coupling(std::size_t i, std::size_t j) const;  // g_ij for i != j (symmetric)
  static std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) noexcept;

 private:
  std::size_t n_;
  std::vector<double> g_;
  double h_;
};

/// Spin configuration with entries +1 / -1.
using Spins = std::vector<int>;

double hamiltonian(const SKInstance& instance, const Spins& sigma);

/// log Z_N(beta) by a Gray-code walk over all 2^N configurations with O(N)
/// local-field updates per flip and a running log-sum-exp. N <= 24.
double log_partition_exact(const SKInstance& instance, double beta);

/// Reference implementation: recomputes H from scratch for every
/// configuration. Exists to cross-check the Gray-code walk.
double log_partition_naive(const SKInstance& instance, double beta);

enum class Observable { energy, magnetization, overlap };

/// Gibbs average of an observable. magnetization = (1/N) sum sigma_i;
/// overlap = (1/N) sum sigma_i tau_i against `reference` (required for overlap).
double gibbs_expectation_exact(const SKInstance& instance, double beta, Observable observable,
                               const Spins& reference = {});

struct FreeEnergyEstimate {
  double phi = 0.0;        // mean over disorder of (1/N) log Z_N
  double std_error = 0.0;
  std::size_t n_disorder = 0;
  double f = 0.0;          // -phi / beta for beta > 0, NaN otherwise
};

/// Disorder average of (1/N) log Z_N over n_disorder independent coupling draws.
FreeEnergyEstimate quenched_free_energy(std::size_t n_spins, double beta, double field,
                                        std::size_t n_disorder, std::uint64_t seed);

struct MetropolisTrace {
  std::vector<double> energy;         // H after each post-burn-in sweep
  std::vector<double> magnetization;  // (1/N) sum sigma after each post-burn-in sweep
  double acceptance_rate = 0.0;
};

/// Single-spin-flip Metropolis with acceptance min(1, exp(-beta dH)), sites
/// visited in order 0..N-1. Records sweeps - burn_in samples.
MetropolisTrace metropolis_sampler(const SKInstance& instance, double beta, std::size_t sweeps,
                                   std::size_t burn_in, std::uint64_t seed);

/// log 2 + beta^2 / 4: the high-temperature (beta <= 1, h = 0) limit of phi_N.
double high_temperature_limit(double beta) noexcept;

/// (1/N) log E Z_N = log 2 + (beta^2 / 4)(1 - 1/N) at h = 0.
double annealed_bound(double beta, std::size_t n_spins) noexcept;

struct ParisiGapRow {
  std::size_t n_spins = 0;
  double phi = 0.0;
  double std_error = 0.0;
  double reference = 0.0;
  double annealed = 0.0;
  double gap = 0.0;  // phi - reference
  bool below_annealed = true;  // phi <= annealed + 3 s.e.
};

/// Rows of (N, phi_N, s.e., reference, annealed bound, gap) for beta <= 1, h = 0.
/// DomainError outside that regime.
std::vector<ParisiGapRow> parisi_gap_report(double beta, double field,
                                            const std::vector<std::size_t>& sizes,
                                            std::size_t n_disorder, std::uint64_t seed);

/// Minimum over interior grid points of the chord excess
///   w f(b_{i-1}) + (1 - w) f(b_{i+1}) - f(b_i),  w = (b_{i+1} - b_i) / (b_{i+1} - b_{i-1}),
/// of f(beta) = (1/N) log Z_N(beta). Nonnegative iff the samples are convex.
double beta_convexity_check(const SKInstance& instance, std::span<const double> beta_grid);

}  // namespace chainlab::spinglass
