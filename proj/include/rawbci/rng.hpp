#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "rawbci/matrix.hpp"

namespace rawbci {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Stable derivation of a stream seed from a base seed and stream indices.
/// Each index is folded in with one splitmix64 round, so any (subject,
/// modality) or (run, epoch) stream can be regenerated in isolation.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a) {
  return splitmix64(base ^ splitmix64(a));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b) {
  return derive_seed(derive_seed(base, a), b);
}

// Deterministic random source. mt19937_64 is fully specified by the C++
// standard and the transforms below are fixed here, so one seed reproduces
// the identical stream on any platform. std::normal_distribution and
// std::shuffle are implementation-defined and deliberately not used.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in (0, 1]: top 53 bits of the next draw, shifted off
  /// zero so log() stays finite in normal().
  double uniform01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal draw via the Box-Muller transform. Draws are produced
  /// in pairs; the second of each pair is cached and returned next.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform index in [0, n). Plain modulo; the bias is negligible for
  /// n << 2^64.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be > 0");
    return static_cast<std::size_t>(next_u64() % n);
  }

  /// Fisher-Yates shuffle using uniform_index draws.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// rows x cols matrix of scale * N(0,1) draws, filled row-major.
inline Matrix randn(SeededRng& rng, std::size_t rows, std::size_t cols,
                    double scale) {
  if (scale < 0.0) throw std::invalid_argument("randn: scale must be >= 0");
  Matrix out(rows, cols);
  for (double& v : out.data()) v = scale * rng.normal();
  return out;
}

}  // namespace rawbci
