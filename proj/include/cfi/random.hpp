#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace cfi {

// splitmix64 finalizer, used only to derive well-separated seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic random stream for one replication.
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the standard.
/// The standard distributions are not, so the conversions to doubles and
/// bounded integers are done here to keep results identical across
/// standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  /// Stream for replication `index` of a run seeded with `master_seed`.
  /// Streams for different indices are independent of evaluation order.
  static RandomStream for_replication(std::uint64_t master_seed, std::uint64_t index) {
    return RandomStream(mix_seed(master_seed) ^ mix_seed(index ^ 0xD1B54A32D192ED03ULL));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Rejection on the largest multiple of bound.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

  /// Fisher-Yates shuffle driven by below(); std::shuffle is not portable
  /// across standard libraries.
  template <typename RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cfi
