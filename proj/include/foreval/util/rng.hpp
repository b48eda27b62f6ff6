#ifndef FOREVAL_UTIL_RNG_HPP
#define FOREVAL_UTIL_RNG_HPP

#include <cstdint>

namespace foreval {

// SplitMix64 (Steele, Lea, Flood 2014). Small, fast, and fully specified,
// which keeps every seeded code path reproducible across platforms and
// standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in [0, bound). Plain modulo: the bias is O(bound / 2^64) and the
  // mapping is part of the documented resampling scheme.
  std::uint64_t bounded(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

// Substream seed for a counter-based family of generators: replicate b of a
// run seeded with `seed` uses SplitMix64(substream_seed(seed, b)). Streams
// can be generated independently and in any order.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t counter) {
  SplitMix64 mix(seed ^ (0x9E3779B97F4A7C15ULL * (counter + 1)));
  return mix.next();
}

}  // namespace foreval

#endif  // FOREVAL_UTIL_RNG_HPP
