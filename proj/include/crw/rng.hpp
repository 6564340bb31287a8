#ifndef CRW_RNG_HPP
#define CRW_RNG_HPP

#include <cmath>
#include <cstdint>

namespace crw {

/// splitmix64 step; used for seed expansion and counter-based stream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Stable 64-bit mix of two words (key derivation for lazy tree vertices).
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
  return splitmix64(s);
}

/// xoshiro256++ generator (Blackman & Vigna), seeded through splitmix64.
///
/// All samplers below are hand-specified so that streams are reproducible
/// across standard-library implementations and releases.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Exponential waiting time with the given rate (rate > 0).
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Unbiased uniform integer in [0, n), n >= 1 (Lemire's method).
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        m = static_cast<unsigned __int128>(next()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Fair coin.
  bool coin() { return (next() >> 63) != 0; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

/// Independent replicate stream: xoshiro256++ seeded by splitmix64 from
/// master_seed + (replicate + 1) * golden gamma. Counter-based, so streams
/// for distinct replicate indices never depend on execution order.
inline Rng replicate_stream(std::uint64_t master_seed, std::uint64_t replicate) {
  return Rng(master_seed + (replicate + 1) * 0x9E3779B97F4A7C15ull);
}

}  // namespace crw

#endif  // CRW_RNG_HPP
