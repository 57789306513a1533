#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace topoprobe {

/// SplitMix64 finalizer. Used to expand seeds and to derive per-chain streams.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for an independent stream: hash of (master_seed, stream_index, chain_index).
///
/// Every Monte Carlo chain and every training run derives its generator from
/// this function, so datasets are reproducible and independent of how work is
/// scheduled across threads.
std::uint64_t chain_seed(std::uint64_t master_seed, std::uint64_t stream_index,
                         std::uint64_t chain_index) noexcept;

/// xoshiro256** generator (Blackman & Vigna), state expanded from a 64-bit
/// seed with SplitMix64.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }
  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound). Unbiased (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t bound) noexcept;

  bool coin() noexcept { return (next() >> 63) != 0; }

 private:
  std::array<std::uint64_t, 4> s_;
};

/// Fisher-Yates shuffle with a fixed algorithm (std::shuffle is not portable
/// across standard libraries).
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace topoprobe
