// Deterministic random streams. All randomness in the library flows through
// std::mt19937_64 (bit-exact across platforms per the C++ standard) seeded by
// a SplitMix64 hash of the stream coordinates, so every trial/role pair gets
// an independent, reproducible stream.
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <vector>

namespace pidma {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Folds an ordered tuple of coordinates into one stream seed.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;  // arbitrary nonzero start
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

// Stream roles used by the simulation harness.
enum class StreamRole : std::uint64_t {
  Message = 1,
  Phase = 2,
  Noise = 3,
  Interleaver = 4,
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1); 53 significant bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
  }

  // Standard normal via Box-Muller; avoids the implementation-defined
  // std::normal_distribution so streams are reproducible everywhere.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint8_t bit() { return static_cast<std::uint8_t>(gen_() >> 63); }

  // Fisher-Yates permutation of {0..m-1}.
  std::vector<int> permutation(int m) {
    std::vector<int> p(m);
    for (int i = 0; i < m; ++i) p[i] = i;
    for (int i = m - 1; i > 0; --i) {
      const int j = static_cast<int>(below(static_cast<std::uint64_t>(i) + 1));
      std::swap(p[i], p[j]);
    }
    return p;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace pidma
