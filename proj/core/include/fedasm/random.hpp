#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace fedasm {

__extension__ using u128 = unsigned __int128;
__extension__ using i128 = __int128;

/// xoshiro256** seeded through SplitMix64. Satisfies
/// UniformRandomBitGenerator, so it composes with <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0x9e3779b97f4a7c15ULL);

  /// Independent stream `stream` of a master seed (counter-mode seeding).
  static Rng for_stream(std::uint64_t master_seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform integer in [0, bound); bound > 0. Unbiased.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform integer in [0, bound) for 128-bit bounds; bound > 0. Unbiased.
  u128 below128(u128 bound);

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

/// The first k entries of a uniformly random permutation of [0, population),
/// in permutation order. Sparse Fisher-Yates; O(k^2) time, O(k) memory, so it
/// is meant for k much smaller than the population.
std::vector<std::int64_t> sample_ordered(std::int64_t population, std::int64_t k, Rng& rng);

/// Moves a uniformly random k-subset of `items` (in random order) to the front.
template <class T>
void partial_shuffle(std::span<T> items, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k && i < items.size(); ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(items.size() - i));
    using std::swap;
    swap(items[i], items[j]);
  }
}

}  // namespace fedasm
