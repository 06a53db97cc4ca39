#include "fedasm/random.hpp"

#include <stdexcept>

namespace fedasm {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
  for (auto& s : state_) s = splitmix64(seed);
}

Rng Rng::for_stream(std::uint64_t master_seed, std::uint64_t stream) {
  std::uint64_t mix = master_seed;
  std::uint64_t a = splitmix64(mix);
  std::uint64_t counter = stream ^ (a * 0xd1b54a32d192ed03ULL);
  return Rng(splitmix64(counter) ^ a);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: zero bound");
  // Lemire's nearly-divisionless method.
  u128 m = static_cast<u128>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<u128>((*this)()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

u128 Rng::below128(u128 bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below128: zero bound");
  if (bound <= std::numeric_limits<std::uint64_t>::max()) {
    return below(static_cast<std::uint64_t>(bound));
  }
  // Rejection on the smallest power-of-two mask covering bound.
  u128 mask = bound - 1;
  mask |= mask >> 1;
  mask |= mask >> 2;
  mask |= mask >> 4;
  mask |= mask >> 8;
  mask |= mask >> 16;
  mask |= mask >> 32;
  mask |= mask >> 64;
  for (;;) {
    u128 v = (static_cast<u128>((*this)()) << 64) | (*this)();
    v &= mask;
    if (v < bound) return v;
  }
}

std::vector<std::int64_t> sample_ordered(std::int64_t population, std::int64_t k, Rng& rng) {
  if (k < 0 || k > population) {
    throw std::invalid_argument("sample_ordered: sample larger than population");
  }
  // Virtual array a[i] = i; `moved` records the positions that were swapped.
  std::vector<std::pair<std::int64_t, std::int64_t>> moved;
  moved.reserve(static_cast<std::size_t>(k));
  auto value_at = [&](std::int64_t pos) {
    for (const auto& [p, v] : moved) {
      if (p == pos) return v;
    }
    return pos;
  };
  auto set_at = [&](std::int64_t pos, std::int64_t v) {
    for (auto& [p, old] : moved) {
      if (p == pos) {
        old = v;
        return;
      }
    }
    moved.emplace_back(pos, v);
  };
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i) {
    auto j = i + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(population - i)));
    std::int64_t vi = value_at(i);
    std::int64_t vj = value_at(j);
    out.push_back(vj);
    set_at(j, vi);
  }
  return out;
}

}  // namespace fedasm
