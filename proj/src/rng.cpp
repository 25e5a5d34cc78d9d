// Apache License, Version 2.0, refer to LICENSE.txt
#include "bvmem/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bvmem {

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
  // Boost the shape above 1 and correct at the end; the Marsaglia-Tsang
  // rejection step below requires shape >= 1.
  if (shape < 1.0) {
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta(double a, double b) {
  const double ga = gamma(a);
  const double gb = gamma(b);
  const double out = ga / (ga + gb);
  // Extreme shapes can underflow one gamma variate to zero; keep the draw
  // inside the open interval expected by stick-breaking consumers.
  if (out <= 0.0) return std::numeric_limits<double>::min();
  if (out >= 1.0) return std::nextafter(1.0, 0.0);
  return out;
}

}  // namespace bvmem
