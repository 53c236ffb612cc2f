#ifndef ENGAGEMENT_RNG_HPP_
#define ENGAGEMENT_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace engagement {

// Portable random stream.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The standard distributions are not (their algorithms are
// implementation-defined), so every draw used by this library is derived
// from raw 64-bit engine output here.
//
// Streams: a (seed, stream id) pair is mixed through SplitMix64 into a single
// 64-bit engine seed. Each consumer documents which stream ids it uses, e.g.
// best-response dynamics uses stream 0 for the initial profile and stream t
// for the producer permutation of pass t.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream)
      : engine_(MixSeed(seed, stream)) {}

  static std::uint64_t SplitMix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed;
    const std::uint64_t a = SplitMix64(state);
    state = a ^ (stream * 0xD1B54A32D192ED03ULL);
    return SplitMix64(state);
  }

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Unit-rate exponential by inversion.
  double Exponential() { return -std::log1p(-Uniform01()); }

  // Uniform integer in [0, bound) by rejection; unbiased and portable.
  std::uint64_t UniformIndex(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  // Fisher-Yates shuffle of 0..n-1.
  std::vector<std::size_t> Permutation(std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
      const auto j = static_cast<std::size_t>(UniformIndex(i));
      std::swap(order[i - 1], order[j]);
    }
    return order;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace engagement

#endif  // ENGAGEMENT_RNG_HPP_
