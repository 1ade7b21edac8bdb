#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace tvws {

/// Derive the seed of an independent sub-stream from a master seed.
/// Splitmix64 over (master, stream) so that distinct stream ids give
/// decorrelated engines and the derivation is stable across platforms.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// Deterministic uniform source. The engine is std::mt19937_64, whose raw
/// output sequence is pinned by the standard; every distribution mapping is
/// implemented here so results are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0,1) with 53 random bits.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  bool bernoulli(double p) { return next_double() < p; }

  /// Uniform index in [0,n). n must be >= 1.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Index drawn from the distribution given by `probs` (assumed to sum to ~1);
  /// any residual mass from round-off goes to the last index.
  std::size_t categorical(std::span<const double> probs) {
    const double u = next_double();
    double cdf = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      cdf += probs[i];
      if (u < cdf) return i;
    }
    return probs.empty() ? 0 : probs.size() - 1;
  }

  /// In-place Fisher-Yates shuffle (std::shuffle is not reproducible across
  /// standard libraries).
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tvws
