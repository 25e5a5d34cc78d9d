// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <random>

namespace bvmem {

// Seedable random stream shared by every stochastic operation in the
// library. The variate transforms are written out by hand instead of
// using std::*_distribution: the standard leaves those algorithms
// implementation-defined, and archives are required to be bit-identical
// for a given seed regardless of the standard library in use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(gen_() >> 12) + 0.5) * 0x1.0p-52;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (no cached spare, so the stream
  // position is a simple function of the call count).
  double normal();

  // Gamma with the given shape, unit scale (Marsaglia-Tsang squeeze).
  double gamma(double shape);

  double beta(double a, double b);

  double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace bvmem
