#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "affsup/matrix.hpp"

namespace affsup {

// Deterministic splitmix64 stream: identical seeds give identical draw
// sequences across runs and platforms (draws are pure integer arithmetic;
// real-valued helpers derive from them).
class RngStream {
 public:
  static constexpr const char* kAlgorithm = "splitmix64";

  explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; consumes two draws per value.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  // Uniform integer in [0, n); n > 0.
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Independent child stream; advances this stream by one draw.
  RngStream split() { return RngStream(next_u64() ^ 0x5851F42D4C957F2Dull); }

  template <class T>
  void fill_uniform(Matrix<T>& m, T lo, T hi) {
    for (std::size_t i = 0; i < m.size(); ++i)
      m.data()[i] = static_cast<T>(uniform(lo, hi));
  }

  template <class T>
  void fill_normal(Matrix<T>& m, T mean, T stddev) {
    for (std::size_t i = 0; i < m.size(); ++i)
      m.data()[i] = static_cast<T>(mean + stddev * normal());
  }

  template <class It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint32_t>(last - first);
    for (std::uint32_t i = n; i > 1; --i)
      std::swap(first[i - 1], first[below(i)]);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace affsup
