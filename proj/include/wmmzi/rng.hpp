#pragma once

#include <cmath>
#include <cstdint>

namespace wmmzi {

/// Counter-based pseudo-random generator (SplitMix64 finalizer over an
/// incrementing counter). Every value is a pure function of (key, counter),
/// so independent streams for sweep points, photons and dark-count channels
/// can be derived up front and consumed in any schedule without changing
/// the numbers they produce.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1] (safe as a log() argument).
  double next_open_double() { return 1.0 - next_double(); }

  /// Exponential variate with the given rate (rate > 0).
  double next_exponential(double rate) {
    return -std::log(next_open_double()) / rate;
  }

  bool next_bernoulli(double p) { return next_double() < p; }

  std::uint64_t key() const { return key_; }
  std::uint64_t draws() const { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;

  friend std::uint64_t derive_key(std::uint64_t, std::uint64_t);
};

/// Derives a child stream key from a parent key and a salt (point index,
/// photon index, purpose tag, ...). Chain calls to mix several salts.
inline std::uint64_t derive_key(std::uint64_t parent, std::uint64_t salt) {
  return CounterRng::mix(parent ^ CounterRng::mix(salt + 0xD1B54A32D192ED03ull));
}

inline std::uint64_t derive_key(std::uint64_t parent, std::uint64_t a,
                                std::uint64_t b) {
  return derive_key(derive_key(parent, a), b);
}

inline std::uint64_t derive_key(std::uint64_t parent, std::uint64_t a,
                                std::uint64_t b, std::uint64_t c) {
  return derive_key(derive_key(parent, a, b), c);
}

/// Purpose tags keeping derived streams disjoint by construction.
namespace stream_tag {
inline constexpr std::uint64_t emission = 0x01;
inline constexpr std::uint64_t blinking = 0x02;
inline constexpr std::uint64_t transport = 0x03;
inline constexpr std::uint64_t dark_counts = 0x04;
}  // namespace stream_tag

}  // namespace wmmzi
