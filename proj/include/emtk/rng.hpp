#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace emtk {

// SplitMix64 (Steele, Lea, Flood). All randomness in the toolkit flows
// through this generator so splits and initializations are reproducible
// across platforms and languages.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound) by plain modulo reduction. The bias is
  // below 2^-50 for the sizes used here and keeps the mapping trivially
  // portable.
  std::uint64_t below(std::uint64_t bound) noexcept { return next() % bound; }

 private:
  std::uint64_t state_;
};

// Seed for an independent sub-stream: first output of splitmix64(seed ^ index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return SplitMix64(seed ^ index).next();
}

// Fisher-Yates, walking from the back: swap(i, below(i + 1)).
template <typename T>
void shuffle(std::span<T> items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace emtk
