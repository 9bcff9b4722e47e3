#ifndef ROBUSTDX_RNG_HPP
#define ROBUSTDX_RNG_HPP

#include <cstdint>
#include <random>

namespace robustdx {

/// SplitMix64 finalizer; used to derive independent stream seeds.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the `stream`-th child of `seed`. Children of distinct streams are
/// decorrelated, and the mapping is a pure function of its arguments.
[[nodiscard]] constexpr std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Deterministic engine plus the two draws the library needs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  /// Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  /// Uniform on (0, 1].
  double uniform_open_closed() { return 1.0 - uniform(); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(engine_); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace robustdx

#endif  // ROBUSTDX_RNG_HPP
