// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>

#include "bvmem/evaluation.hpp"
#include "bvmem/stats.hpp"
#include "bvmem/vmem.hpp"

namespace bvmem {

// Parametric one-component log-normal benchmark, fitted by maximum a
// posteriori under the same priors the mixture sampler uses for eta and
// for the innovation precision.
struct LN1Fit {
  MeanParams eta;
  Matrix sigma;
  Vector mu1;
  double logPosterior = 0.0;
  Vector stdErrors;
  Matrix etaCovariance;  // inverse-curvature block for eta; not serialized
};

struct LN1Config {
  int multistarts = 5;
  double tolerance = 1e-8;
  long maxCycles = 60;
  double etaPriorVariance = 20.0;
  NWHyper prior;  // empty scaleMatrix means: use default_nw_hyper(d)
  std::uint64_t seed = 97;
};

// Log-likelihood under the unit-mean log-normal innovation
// eps ~ logN(-diag(sigma)/2, sigma); -inf when the recursion leaves the
// positive orthant.
[[nodiscard]] double ln1_loglik(const MeanParams& params, const Matrix& sigma,
                                const SeriesMatrix& series, const Vector& mu1);

// Joint log-posterior (up to constants shared with the mixture model):
// loglik + N(eta; 0, v I) + Wishart(sigma^-1; a, W) evaluated at sigma^-1.
[[nodiscard]] double ln1_logposterior(const MeanParams& params,
                                      const Matrix& sigma,
                                      const SeriesMatrix& series,
                                      const Vector& mu1,
                                      const LN1Config& config);

// MAP over (eta, chol(sigma)) by a block-cyclic derivative-free simplex
// search (blocks: omega, B, A, Cholesky factor) from several jittered
// moment-based starts. Standard errors come from the eta block of the
// inverse finite-difference Hessian at the mode.
[[nodiscard]] LN1Fit ln1_map(const SeriesMatrix& series,
                             const LN1Config& config,
                             const Vector& mu1Override = Vector());

// Plug-in predictive score at the MAP (a single-draw lps).
[[nodiscard]] double ln1_lps(const LN1Fit& fit, const SeriesMatrix& series);

// lpml over Gaussian (Laplace) draws around the mode; draws whose
// recursion leaves the positive orthant are rejected and redrawn.
[[nodiscard]] double ln1_lpml(const LN1Fit& fit, const SeriesMatrix& series,
                              const LN1Config& config, long draws, Rng& rng);

}  // namespace bvmem
