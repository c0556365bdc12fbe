#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace fedqol {

// All randomness flows through these helpers rather than the std
// distributions, whose draw sequences are implementation-defined. Results
// must reproduce bit-for-bit from a seed across compilers.

inline double unit_uniform(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;  // [0, 1)
}

inline double uniform_in(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * unit_uniform(g);
}

inline double gaussian(std::mt19937_64& g, double mu, double sigma) {
  // Box-Muller, one branch of the pair.
  double u1;
  do {
    u1 = unit_uniform(g);
  } while (u1 == 0.0);
  double u2 = unit_uniform(g);
  constexpr double two_pi = 6.283185307179586476925286766559;
  return mu + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Laplace(0, scale) by inverse CDF. E|draw| equals scale.
inline double laplace(std::mt19937_64& g, double scale) {
  double u;
  do {
    u = unit_uniform(g);
  } while (u == 0.0);
  u -= 0.5;  // (-1/2, 1/2)
  double mag = -std::log(1.0 - 2.0 * std::abs(u));
  return (u < 0.0 ? -scale : scale) * mag;
}

// Derived stream seed for (round, node) style substreams. step 0 returns the
// base seed unchanged, which keeps degenerate runs identical to plain ones.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t step) {
  return base + 0x9E3779B97F4A7C15ULL * step;
}

inline std::vector<std::size_t> shuffled_indices(std::size_t n,
                                                 std::mt19937_64& g) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(g() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace fedqol
