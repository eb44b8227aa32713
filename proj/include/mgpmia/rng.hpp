#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace mgpmia {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
std::uint64_t splitmix64(std::uint64_t x);

// Child seed for (seed, key). Pure function; used to derive independent
// streams for epochs, nodes, augmentations and so on.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key);
// The label is hashed with FNV-1a, then mixed like an integer key.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

std::uint64_t fnv1a64(std::string_view bytes);

// Deterministic splittable generator.
//
// The bit stream is std::mt19937_64 seeded with splitmix64(seed). The
// engine is fully specified by the C++ standard, and every distribution
// used by the library is implemented below rather than through <random>
// distributions (whose algorithms are implementation-defined), so a given
// seed produces the same draws on every conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  // Independent child stream; depends only on this generator's seed and key,
  // never on how many values were drawn so far.
  Rng split(std::uint64_t key) const { return Rng(derive_seed(seed_, key)); }
  Rng split(std::string_view label) const { return Rng(derive_seed(seed_, label)); }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling, so unbiased. n must be > 0.
  std::size_t below(std::size_t n);

  // Standard normal via Box-Muller (one value per call).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace mgpmia
