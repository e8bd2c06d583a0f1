#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace homcsel {

// Counter-based generator: every draw is a pure hash of (seed, stream, a, b, c),
// so scenes are reproducible bit for bit regardless of evaluation order and
// draws can be made in parallel. The mixer is splitmix64.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t word(std::uint64_t stream, std::uint64_t a, std::uint64_t b = 0,
                     std::uint64_t c = 0) const {
    std::uint64_t h = mix(seed_ ^ 0x243f6a8885a308d3ull);
    h = mix(h ^ stream);
    h = mix(h ^ a);
    h = mix(h ^ b);
    h = mix(h ^ c);
    return h;
  }

  // uniform on the open interval (0, 1); never 0, safe under log()
  double uniform01(std::uint64_t stream, std::uint64_t a, std::uint64_t b = 0,
                   std::uint64_t c = 0) const {
    return (static_cast<double>(word(stream, a, b, c) >> 11) + 0.5) * 0x1p-53;
  }

  double normal(std::uint64_t stream, std::uint64_t a, std::uint64_t b = 0) const {
    const double u1 = uniform01(stream, a, b, 0);
    const double u2 = uniform01(stream, a, b, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double exponential(std::uint64_t stream, std::uint64_t a, std::uint64_t b = 0) const {
    return -std::log(uniform01(stream, a, b, 0));
  }

  double laplace(std::uint64_t stream, std::uint64_t a, std::uint64_t b = 0) const {
    const double u = uniform01(stream, a, b, 0);
    return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 - 2.0 * u);
  }

  // integer in [0, bound); bound must be >= 1
  std::uint64_t below(std::uint64_t bound, std::uint64_t stream, std::uint64_t a,
                      std::uint64_t b = 0) const {
    return word(stream, a, b) % bound;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

}  // namespace homcsel
