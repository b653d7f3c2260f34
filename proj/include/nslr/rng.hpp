#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace nslr {

// SplitMix64 stream (Steele, Lea & Flood 2014). Chosen over std::mt19937 so
// that a reimplementation in another language can replay the exact streams:
// the whole generator is the three xor-shift-multiply lines below.
//
// Gaussians use the plain Box-Muller form, no ziggurat, no cached spare:
// each call consumes exactly two uniform draws and returns
// sqrt(-2 ln u1) * cos(2 pi u2). Bounded integers use next_u64() % bound
// (bias < bound / 2^64, irrelevant at our sizes).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1]; never returns 0 so ln() below is always finite.
  double next_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double next_gaussian() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

  // Fisher-Yates, descending index order.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct values from {0, ..., pool-1}, returned sorted ascending.
  std::vector<std::size_t> sample_without_replacement(std::size_t pool,
                                                      std::size_t k);

 private:
  std::uint64_t state_;
};

inline std::vector<std::size_t> Rng::sample_without_replacement(
    std::size_t pool, std::size_t k) {
  std::vector<std::size_t> all(pool);
  for (std::size_t i = 0; i < pool; ++i) all[i] = i;
  for (std::size_t i = 0; i < k && i + 1 < pool; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(next_below(pool - i));
    std::swap(all[i], all[j]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace nslr
