#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace ppg {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Order-sensitive 64-bit mix of two keys.
inline std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t s = a ^ (b * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL);
  splitmix64(s);
  return splitmix64(s);
}

// xoshiro256++ generator. Satisfies UniformRandomBitGenerator, so it can
// drive the <random> distributions. Seeding is a handful of integer ops,
// which makes per-(step, particle) substreams affordable.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0x5eedULL) noexcept { reseed(seed); }

  void reseed(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
    normal_.reset();
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n-1}; n must be positive.
  std::size_t uniform_index(std::size_t n) noexcept {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(*this);
  }

  double normal() { return normal_(*this); }

  // Independent stream keyed by (this generator's next output, key). Used
  // with a per-step salt so that per-particle work is order independent.
  static Rng substream(std::uint64_t salt, std::uint64_t key) noexcept {
    return Rng(mix_keys(salt, key));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  std::normal_distribution<double> normal_;
};

}  // namespace ppg
