#include "chainlab/spinglass.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "chainlab/errors.hpp"
#include "chainlab/parallel.hpp"
#include "chainlab/rng.hpp"
#include "chainlab/stats.hpp"

namespace chainlab::spinglass {

namespace {

void require_enumerable(std::size_t n) {
  if (n > kMaxExactSpins) throw SizeLimitExceeded("spins for exact enumeration", n, kMaxExactSpins);
}

void require_beta(double beta) {
  if (!std::isfinite(beta) || beta < 0.0) throw InvalidArgument("beta must be finite and >= 0");
}

// Dense symmetric J = g / sqrt(N) with zero diagonal; rows are contiguous so
// the local-field update after a flip streams through one row.
std::vector<double> scaled_couplings(const SKInstance& inst) {
  const std::size_t n = inst.size();
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> j(n * n, 0.0);
  std::size_t p = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b, ++p) {
      j[a * n + b] = j[b * n + a] = inst.couplings()[p] * s;
    }
  }
  return j;
}

// Streaming log-sum-exp of weights exp(x) with optional weighted observable
// sum. Sums are rescaled whenever a new maximum appears.
struct LogSumExp {
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  double weighted = 0.0;

  void add(double x, double obs = 0.0) {
    if (x <= max) {
      const double w = std::exp(x - max);
      sum += w;
      weighted += w * obs;
    } else {
      const double r = std::exp(max - x);
      sum = sum * r + 1.0;
      weighted = weighted * r + obs;
      max = x;
    }
  }
  double log() const { return max + std::log(sum); }
  double average() const { return weighted / sum; }
};

enum class Track { none, energy, magnetization, overlap };

// Gray-code walk from sigma = (+1, ..., +1). Flip k at step s is the lowest
// set bit of s; each flip costs one local-field row update.
LogSumExp enumerate(const SKInstance& inst, double beta, Track track, const Spins& tau) {
  const std::size_t n = inst.size();
  const double h = inst.field();
  const std::vector<double> j = scaled_couplings(inst);

  std::vector<int> sigma(n, 1);
  std::vector<double> local(n, 0.0);  // sum_b J_ab sigma_b
  for (std::size_t a = 0; a < n; ++a) {
    double acc = 0.0;
    for (std::size_t b = 0; b < n; ++b) acc += j[a * n + b];
    local[a] = acc;
  }
  double energy = 0.0;
  for (std::size_t a = 0; a < n; ++a) energy -= 0.5 * local[a];
  energy -= h * static_cast<double>(n);
  long long spin_sum = static_cast<long long>(n);
  long long overlap_sum = 0;
  if (track == Track::overlap) {
    for (std::size_t a = 0; a < n; ++a) overlap_sum += tau[a];
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  auto observe = [&]() -> double {
    switch (track) {
      case Track::energy: return energy;
      case Track::magnetization: return static_cast<double>(spin_sum) * inv_n;
      case Track::overlap: return static_cast<double>(overlap_sum) * inv_n;
      case Track::none: break;
    }
    return 0.0;
  };

  LogSumExp acc;
  acc.add(-beta * energy, observe());
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    const auto k = static_cast<std::size_t>(std::countr_zero(step));
    const int old = sigma[k];
    energy += 2.0 * old * (local[k] + h);
    sigma[k] = -old;
    spin_sum -= 2 * old;
    if (track == Track::overlap) overlap_sum -= 2LL * old * tau[k];
    const double delta = -2.0 * old;
    const double* row = &j[k * n];
    for (std::size_t b = 0; b < n; ++b) local[b] += row[b] * delta;
    acc.add(-beta * energy, observe());
  }
  return acc;
}

void check_spins(const Spins& sigma, std::size_t n, const char* what) {
  if (sigma.size() != n) {
    throw BadConfiguration(std::string(what) + " has " + std::to_string(sigma.size()) +
                           " entries, expected " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (sigma[i] != 1 && sigma[i] != -1) {
      throw BadConfiguration(std::string(what) + " entry " + std::to_string(i) + " is not +-1");
    }
  }
}

}  // namespace

SKInstance::SKInstance(std::size_t n_spins, std::vector<double> couplings, double field)
    : n_(n_spins), g_(std::move(couplings)), h_(field) {
  if (n_ == 0) throw InvalidArgument("SK instance needs at least one spin");
  if (g_.size() != n_ * (n_ - 1) / 2) {
    throw InvalidArgument("coupling array has length " + std::to_string(g_.size()) +
                          ", expected N(N-1)/2 = " + std::to_string(n_ * (n_ - 1) / 2));
  }
  for (double g : g_) {
    if (!std::isfinite(g)) throw InvalidArgument("non-finite coupling");
  }
  if (!std::isfinite(h_)) throw InvalidArgument("non-finite field");
}

SKInstance SKInstance::random(std::size_t n_spins, double field, std::uint64_t seed,
                              std::uint64_t disorder_index) {
  Philox4x32 rng(seed, disorder_index);
  std::vector<double> g(n_spins == 0 ? 0 : n_spins * (n_spins - 1) / 2);
  for (double& x : g) x = rng.normal();
  return SKInstance(n_spins, std::move(g), field);
}

std::size_t SKInstance::pair_index(std::size_t i, std::size_t j, std::size_t n) noexcept {
  // offset of row i is sum_{r<i} (n - 1 - r)
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

double SKInstance::coupling(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_ || i == j) throw InvalidArgument("coupling index out of range");
  if (i > j) std::swap(i, j);
  return g_[pair_index(i, j, n_)];
}

double hamiltonian(const SKInstance& instance, const Spins& sigma) {
  const std::size_t n = instance.size();
  check_spins(sigma, n, "sigma");
  double pair = 0.0;
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      pair += instance.couplings()[p] * sigma[i] * sigma[j];
    }
  }
  double mag = 0.0;
  for (int s : sigma) mag += s;
  return -pair / std::sqrt(static_cast<double>(n)) - instance.field() * mag;
}

double log_partition_exact(const SKInstance& instance, double beta) {
  require_beta(beta);
  require_enumerable(instance.size());
  if (beta == 0.0) return static_cast<double>(instance.size()) * std::numbers::ln2;
  return enumerate(instance, beta, Track::none, {}).log();
}

double log_partition_naive(const SKInstance& instance, double beta) {
  require_beta(beta);
  require_enumerable(instance.size());
  const std::size_t n = instance.size();
  Spins sigma(n);
  LogSumExp acc;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s) {
    for (std::size_t i = 0; i < n; ++i) sigma[i] = ((s >> i) & 1U) != 0U ? -1 : 1;
    acc.add(-beta * hamiltonian(instance, sigma));
  }
  return acc.log();
}

double gibbs_expectation_exact(const SKInstance& instance, double beta, Observable observable,
                               const Spins& reference) {
  require_beta(beta);
  require_enumerable(instance.size());
  Track track = Track::energy;
  if (observable == Observable::magnetization) track = Track::magnetization;
  if (observable == Observable::overlap) {
    check_spins(reference, instance.size(), "overlap reference");
    track = Track::overlap;
  }
  return enumerate(instance, beta, track, reference).average();
}

FreeEnergyEstimate quenched_free_energy(std::size_t n_spins, double beta, double field,
                                        std::size_t n_disorder, std::uint64_t seed) {
  require_beta(beta);
  require_enumerable(n_spins);
  if (n_disorder < 10) throw InvalidArgument("quenched free energy needs at least 10 disorder samples");

  const auto values = parallel_map(n_disorder, [&](std::size_t d) {
    const SKInstance inst = SKInstance::random(n_spins, field, seed, d);
    return log_partition_exact(inst, beta) / static_cast<double>(n_spins);
  });

  FreeEnergyEstimate out;
  out.n_disorder = n_disorder;
  out.phi = mean(values);
  out.std_error = sample_stddev(values) / std::sqrt(static_cast<double>(n_disorder));
  out.f = beta > 0.0 ? -out.phi / beta : std::numeric_limits<double>::quiet_NaN();
  return out;
}

MetropolisTrace metropolis_sampler(const SKInstance& instance, double beta, std::size_t sweeps,
                                   std::size_t burn_in, std::uint64_t seed) {
  require_beta(beta);
  if (burn_in > sweeps) throw InvalidArgument("burn_in exceeds sweeps");
  const std::size_t n = instance.size();
  const double h = instance.field();
  const std::vector<double> j = scaled_couplings(instance);

  Philox4x32 rng(seed, 0);
  Spins sigma(n);
  for (int& s : sigma) s = (rng() & 1U) != 0U ? 1 : -1;
  std::vector<double> local(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) local[a] += j[a * n + b] * sigma[b];
  }
  double energy = hamiltonian(instance, sigma);
  long long spin_sum = 0;
  for (int s : sigma) spin_sum += s;

  MetropolisTrace trace;
  trace.energy.reserve(sweeps - burn_in);
  trace.magnetization.reserve(sweeps - burn_in);
  std::size_t accepted = 0;
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t k = 0; k < n; ++k) {
      const int old = sigma[k];
      const double dh = 2.0 * old * (local[k] + h);
      // always draw so the stream position does not depend on dh
      const double u = rng.uniform();
      if (dh <= 0.0 || u < std::exp(-beta * dh)) {
        ++accepted;
        sigma[k] = -old;
        energy += dh;
        spin_sum -= 2 * old;
        const double delta = -2.0 * old;
        const double* row = &j[k * n];
        for (std::size_t b = 0; b < n; ++b) local[b] += row[b] * delta;
      }
    }
    if (sweep >= burn_in) {
      trace.energy.push_back(energy);
      trace.magnetization.push_back(static_cast<double>(spin_sum) / static_cast<double>(n));
    }
  }
  const std::size_t proposals = sweeps * n;
  trace.acceptance_rate =
      proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
  return trace;
}

double high_temperature_limit(double beta) noexcept {
  return std::numbers::ln2 + beta * beta / 4.0;
}

double annealed_bound(double beta, std::size_t n_spins) noexcept {
  const double n = static_cast<double>(n_spins);
  return std::numbers::ln2 + beta * beta / 4.0 * (1.0 - 1.0 / n);
}

std::vector<ParisiGapRow> parisi_gap_report(double beta, double field,
                                            const std::vector<std::size_t>& sizes,
                                            std::size_t n_disorder, std::uint64_t seed) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw DomainError("reference value only available for 0 <= beta <= 1");
  }
  if (field != 0.0) throw DomainError("reference value only available for h = 0");

  std::vector<ParisiGapRow> rows;
  rows.reserve(sizes.size());
  for (std::size_t n : sizes) {
    const FreeEnergyEstimate est = quenched_free_energy(n, beta, 0.0, n_disorder, derive_seed(seed, n));
    ParisiGapRow row;
    row.n_spins = n;
    row.phi = est.phi;
    row.std_error = est.std_error;
    row.reference = high_temperature_limit(beta);
    row.annealed = annealed_bound(beta, n);
    row.gap = beta == 0.0 ? 0.0 : est.phi - row.reference;
    row.below_annealed = est.phi <= row.annealed + kViolationSigmas * est.std_error + 1e-12;
    rows.push_back(row);
  }
  return rows;
}

double beta_convexity_check(const SKInstance& instance, std::span<const double> beta_grid) {
  if (beta_grid.size() < 3) throw InvalidArgument("beta grid needs at least 3 points");
  for (std::size_t i = 1; i < beta_grid.size(); ++i) {
    if (!(beta_grid[i] > beta_grid[i - 1])) throw InvalidArgument("beta grid must be increasing");
  }
  const double n = static_cast<double>(instance.size());
  std::vector<double> f(beta_grid.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = log_partition_exact(instance, beta_grid[i]) / n;

  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    const double w = (beta_grid[i + 1] - beta_grid[i]) / (beta_grid[i + 1] - beta_grid[i - 1]);
    worst = std::min(worst, w * f[i - 1] + (1.0 - w) * f[i + 1] - f[i]);
  }
  return worst;
}

}  // namespace chainlab::spinglass
