#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace formpair {

// Deterministic random helpers. std::uniform_*_distribution is
// implementation-defined, so every draw below is built directly on
// mt19937_64 output to keep results identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); n must be > 0. Rejection-free modulo bias is
  // irrelevant at the sizes used here, but Lemire-style rejection keeps the
  // draw exact anyway.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// FNV-1a over an arbitrary string, used to derive independent per-page seeds
// from a run seed. Pages then draw the same values no matter which worker
// thread processes them.
inline std::uint64_t hash_seed(std::uint64_t base, std::string_view tag) {
  std::uint64_t h = 14695981039346656037ull ^ base;
  for (const char c : tag) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace formpair
