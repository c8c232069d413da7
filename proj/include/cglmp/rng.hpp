#ifndef CGLMP_RNG_HPP
#define CGLMP_RNG_HPP

#include <cstdint>
#include <initializer_list>

namespace cglmp {

// SplitMix64 (Steele/Lea/Vigna). Small state, passes BigCrush, and gives us
// cheap substream derivation: any 64-bit tag sequence maps to an independent
// stream through the same finalizer.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(operator()() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Derives a child seed from a root seed and a tag path, so that parallel
// workers (chunks, bootstrap replicates, ...) get decorrelated streams that
// do not depend on scheduling order.
inline std::uint64_t substream_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> tags) {
  auto mix = [](std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(seed + 0x9e3779b97f4a7c15ULL);
  for (std::uint64_t t : tags) {
    h = mix(h ^ (t + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
  }
  return h;
}

}  // namespace cglmp

#endif
