#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace sphar {

/// SplitMix64 finaliser: a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Hash an ordered tuple of words into one stream key.
std::uint64_t derive_key(std::initializer_list<std::uint64_t> words) noexcept;

/// Counter-based generator: the i-th output is mix64(key + (i+1) * golden).
/// Streams with distinct keys are statistically independent, and a stream's
/// output never depends on how other streams were consumed.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : state_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

}  // namespace sphar
