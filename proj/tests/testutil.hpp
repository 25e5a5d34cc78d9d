// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cmath>
#include <vector>

#include "bvmem/rng.hpp"
#include "bvmem/stats.hpp"
#include "bvmem/vmem.hpp"

namespace testutil {

// Scalar moment accumulator for Monte Carlo checks.
struct Moments {
  long n = 0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sumsq += x * x;
  }
  [[nodiscard]] double mean() const { return sum / static_cast<double>(n); }
  [[nodiscard]] double var() const {
    const double m = mean();
    return sumsq / static_cast<double>(n) - m * m;
  }
  [[nodiscard]] double se() const {
    return std::sqrt(var() / static_cast<double>(n));
  }
};

// Regularized lower incomplete gamma P(s, x), series/continued-fraction
// split as in the usual references. Used for chi-square CDF values.
inline double gamma_p(double s, double x) {
  if (x <= 0.0) return 0.0;
  if (x < s + 1.0) {
    double ap = s;
    double sum = 1.0 / s;
    double del = sum;
    for (int i = 0; i < 1000; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
  }
  double b = x + 1.0 - s;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return 1.0 - std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

inline bvmem::Matrix random_pd(Eigen::Index d, bvmem::Rng& rng) {
  bvmem::Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = 0.3 * rng.normal();
  }
  return a * a.transpose() +
         0.2 * bvmem::Matrix::Identity(d, d);
}

// Positive-entried mean parameters with spectral radius of B + A held
// inside the unit circle.
inline bvmem::MeanParams random_stationary_params(Eigen::Index d,
                                                  bvmem::Rng& rng) {
  bvmem::MeanParams p;
  p.omega = bvmem::Vector(d);
  for (Eigen::Index i = 0; i < d; ++i) p.omega(i) = rng.uniform(0.05, 0.4);
  p.B = bvmem::Matrix(d, d);
  p.A = bvmem::Matrix(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      p.B(i, j) = rng.uniform(0.0, 0.35 / static_cast<double>(d));
      p.A(i, j) = rng.uniform(0.0, 0.35 / static_cast<double>(d));
    }
  }
  return p;
}

// Unit-mean single log-normal innovation for simulation fixtures.
inline bvmem::InnovationSpec unit_lognormal(const bvmem::Matrix& sigma) {
  bvmem::InnovationSpec innov;
  innov.weights = {1.0};
  bvmem::MixtureComponent comp;
  comp.location = -0.5 * sigma.diagonal();
  comp.scale = sigma;
  innov.components = {comp};
  return innov;
}

}  // namespace testutil
