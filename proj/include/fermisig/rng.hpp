#pragma once

// Counter-based deterministic random numbers. Each draw is a pure function of
// (seed, stream, counter), so results are bit-reproducible independently of
// call interleaving or thread count.

#include <cstdint>

namespace fermisig {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : base_(mix(seed, stream)), counter_(0) {}

  // k-th draw of this stream, independent of how many draws happened before
  double uniform_at(std::uint64_t counter) const {
    const std::uint64_t bits = detail::splitmix64(base_ ^ (counter * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull));
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;  // in (0,1)
  }

  double uniform() { return uniform_at(counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t counter() const { return counter_; }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    return detail::splitmix64(detail::splitmix64(seed) ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
  }

  std::uint64_t base_;
  std::uint64_t counter_;
};

}  // namespace fermisig
