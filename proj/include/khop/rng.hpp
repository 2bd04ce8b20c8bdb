#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace khop {

// SplitMix64 (Steele, Lea & Flood 2014). State advances by the golden-ratio
// increment; output is the Stafford "mix13" finalizer. Chosen because it is
// trivially portable: any language with 64-bit wrapping arithmetic reproduces
// the same stream from the same seed.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform integer in [0, bound) by rejection on the top of the range.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x = (*this)();
    while (x >= limit) x = (*this)();
    return x % bound;
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// FNV-1a, 64-bit.
constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Sub-seed for (master, purpose tag, index):
//   mix(mix(mix(master) ^ fnv1a(tag)) + index * golden)
// Each stage goes through the SplitMix64 finalizer so nearby masters, tags
// and indices land far apart.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                    std::uint64_t index) noexcept {
  std::uint64_t h = SplitMix64::mix(master);
  h = SplitMix64::mix(h ^ fnv1a(tag));
  return SplitMix64::mix(h + index * 0x9E3779B97F4A7C15ULL);
}

}  // namespace khop
