#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace pdgnn {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic sub-stream seed for (base, a, b) tuples, e.g. one per fold-run.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(base ^ splitmix64(a + 0x51ed2701ULL) ^ splitmix64(b + 0xc2b2ae35ULL));
}

// mt19937_64 raw output is fully specified by the standard. The draw helpers
// below avoid std::uniform_int_distribution / std::shuffle, whose sequences
// are implementation-defined, so every stream is reproducible bit-for-bit.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Unbiased draw from [0, n). n must be > 0.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t reject_below = (0 - n) % n;  // 2^64 mod n
    std::uint64_t r = engine_();
    while (r < reject_below) r = engine_();
    return r % n;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[bounded(i)]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[bounded(v.size())];
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace pdgnn
