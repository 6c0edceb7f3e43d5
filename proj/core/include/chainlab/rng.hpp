#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace chainlab {

/// Philox4x32-10 counter-based generator.
///
/// A stream is keyed by (seed, stream id); the stream id occupies the upper
/// half of the 128-bit counter, so distinct replicas never overlap and each
/// one can be regenerated independently of scheduling order.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform in (0, 1].
  double uniform_open_left() noexcept { return 1.0 - uniform(); }
  /// Standard normal via Box-Muller; caches the second variate.
  double normal() noexcept;
  /// +1 or -1 with equal probability.
  double rademacher() noexcept { return ((*this)() & 1U) != 0U ? 1.0 : -1.0; }
  /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Raw block function, exposed for known-answer tests.
  static Block bijection(Block counter, std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t block_index_ = 0;
  std::uint64_t stream_;
  Block buffer_{};
  unsigned used_ = 4;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Derives a child seed from a parent seed and a label; used to give each
/// experiment component its own independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) noexcept;

}  // namespace chainlab
