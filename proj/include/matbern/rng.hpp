#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace matbern {

// SplitMix64 (Steele, Lea, Flood 2014). Small state, so a fresh engine per
// step stream is cheap, and the output is fixed by the algorithm rather than
// by the standard library implementation.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Stream-split rule: the seed for sub-stream `stream` of `seed` is two rounds
// of the SplitMix64 finalizer over (seed, stream). Used for per-step streams
// of a path and per-trial seeds of an experiment.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  SplitMix64 a(seed ^ (0x632be59bd9b4e019ULL * (stream + 1)));
  const std::uint64_t first = a();
  SplitMix64 b(first + stream);
  return b();
}

// Uniform on [0, 1) from the top 53 bits.
template <class Engine>
double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// +1 or -1 with probability 1/2 each, from the top bit.
template <class Engine>
double rademacher_sign(Engine& eng) {
  return (eng() >> 63) != 0 ? 1.0 : -1.0;
}

// Marsaglia polar method; returns the first variate of the pair.
template <class Engine>
double standard_normal(Engine& eng) {
  for (;;) {
    const double u = 2.0 * uniform01(eng) - 1.0;
    const double v = 2.0 * uniform01(eng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

}  // namespace matbern
