#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace expdesign {

// Seedable generator with a fully specified output sequence.
//
// The engine is std::mt19937_64, whose sequence is fixed by the standard. The
// standard distributions are implementation-defined, so bounded integers and
// uniform reals are derived here instead: bounded integers use rejection
// sampling on the raw 64-bit output, reals take the top 53 bits. Identical
// seeds therefore give identical draws on every platform and toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  // Uniform real in [0, 1).
  double uniform01();

  // Standard normal via Box-Muller on uniform01().
  double normal();

  // In-place Fisher-Yates: for i = n-1 down to 1, swap item i with item
  // uniform_index(i + 1).
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix_seed(std::uint64_t x);

// Seed for a named substream of a run, e.g. ("topup", round 3). Each purpose
// draws from its own stream so that adding draws in one place never shifts
// the sequence seen by another.
std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t purpose, std::uint64_t round);

namespace stream {
inline constexpr std::uint64_t kAgent = 1;
inline constexpr std::uint64_t kTopUp = 2;
inline constexpr std::uint64_t kFeedbackShuffle = 3;
inline constexpr std::uint64_t kCenterReplace = 4;
}  // namespace stream

}  // namespace expdesign
