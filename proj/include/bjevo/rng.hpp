#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace bjevo {

/// Name of the underlying generator, recorded in run metadata.
inline constexpr std::string_view kPrngName = "mt19937_64";

/// How per-task seeds are derived from the run seed, recorded in run metadata.
inline constexpr std::string_view kSeedDerivation =
    "h=splitmix64(seed); for each part p: h=splitmix64(h^p)";

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent seed for a task identified by `parts` (stream tag,
/// generation, index, ...). Any single session can be replayed from it.
template <typename... Parts>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Parts... parts) noexcept {
  std::uint64_t h = splitmix64(seed);
  ((h = splitmix64(h ^ static_cast<std::uint64_t>(parts))), ...);
  return h;
}

// Stream tags for derive_seed.
namespace stream {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kFitness = 2;
inline constexpr std::uint64_t kBreeding = 3;
inline constexpr std::uint64_t kEvaluation = 4;
inline constexpr std::uint64_t kCompareSecond = 5;
}  // namespace stream

/// Seeded 64-bit generator with distribution helpers whose output does not
/// depend on the standard library implementation.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  std::uint64_t next() { return engine_(); }

  // Unbiased integer in [0, bound), Lemire's multiply-and-reject method.
  std::uint64_t below(std::uint64_t bound) {
    __extension__ using u128 = unsigned __int128;
    u128 m = static_cast<u128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<u128>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  bool coin() { return (next() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

/// Fisher-Yates shuffle.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace bjevo
