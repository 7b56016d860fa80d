#pragma once
#include <cmath>
#include <cstdint>

namespace flatmc {

// Counter-based stream RNG: output i of stream (key) is a SplitMix64-style
// mix of key + i * golden. Streams derived from (seed, stream) pairs are
// independent of evaluation order, so parallel chains reproduce bitwise
// no matter how they are scheduled.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(mix(seed + kGolden) ^ mix(stream ^ 0x9e3779b97f4a7c15ull))) {}

  std::uint64_t next_u64() { return mix(key_ + (++ctr_) * kGolden); }

  // uniform on [0,1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0,1]
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // standard normal via Box-Muller; consumes exactly two counter values
  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // child stream, deterministic in (this stream, i)
  CounterRng fork(std::uint64_t i) const { return CounterRng(key_, i + 1); }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace flatmc
