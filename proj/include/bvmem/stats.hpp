// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "bvmem/rng.hpp"

namespace bvmem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct linalg_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

// One log-normal kernel: location m (log scale) and PD scale matrix.
struct MixtureComponent {
  Vector location;
  Matrix scale;

  [[nodiscard]] Eigen::Index dim() const { return location.size(); }
};

// Stick-breaking state: v_j in (0,1) and the weights they generate.
// Weights are kept in lockstep with the sticks via rebuild_weights().
struct StickState {
  std::vector<double> sticks;
  std::vector<double> weights;
  double concentration = 1.0;

  void rebuild_weights();
  [[nodiscard]] std::size_t size() const { return sticks.size(); }
};

// Normal-Wishart hyperparameters: precision ~ Wishart(degrees, scaleMatrix),
// mean | precision ~ N(priorMean, (priorPrecisionScale * precision)^-1).
// scaleMatrix is the Wishart scale (expected precision = degrees * scaleMatrix).
struct NWHyper {
  double degrees = 0.0;
  Matrix scaleMatrix;
  Vector priorMean;
  double priorPrecisionScale = 1.0;

  [[nodiscard]] Eigen::Index dim() const { return priorMean.size(); }
};

// Cholesky of (M + M^T)/2. Failure to factor means the matrix is not PD;
// there is deliberately no eigenvalue clipping or other repair.
[[nodiscard]] Eigen::LLT<Matrix> cholesky_pd(const Matrix& m);

// log det of the factored matrix.
[[nodiscard]] double cholesky_logdet(const Eigen::LLT<Matrix>& llt);

// log N_d(y; mean, Sigma) given the Cholesky factor of Sigma and its logdet.
[[nodiscard]] double mvn_logdensity(const Vector& y, const Vector& mean,
                                    const Eigen::LLT<Matrix>& chol,
                                    double logdet);

// Multivariate log-normal density and its log. Computed in log space with
// Cholesky quadratic forms; exponentiation happens only at the boundary.
[[nodiscard]] double logn_logdensity(const Vector& x,
                                     const MixtureComponent& comp);
[[nodiscard]] double logn_density(const Vector& x,
                                  const MixtureComponent& comp);

// exp of a draw from N_d(location, scale).
[[nodiscard]] Vector logn_sample(const MixtureComponent& comp, Rng& rng);

// w_j = v_j * prod_{k<j} (1 - v_k) for j = 1..count.
[[nodiscard]] std::vector<double> stick_break(const std::vector<double>& sticks,
                                              std::size_t count);

// Wishart_d(degrees, scale) via the Bartlett decomposition. Returns the
// sampled matrix itself (a precision draw in this codebase).
[[nodiscard]] Matrix wishart_sample(double degrees, const Matrix& scale,
                                    Rng& rng);

// Draw (m, Sigma): precision ~ Wishart(degrees, scaleMatrix), then
// m | precision ~ N(priorMean, (priorPrecisionScale * precision)^-1).
// The returned component carries Sigma = precision^-1.
[[nodiscard]] MixtureComponent normal_wishart_sample(const NWHyper& hyper,
                                                     Rng& rng);

// Conjugate update for i.i.d. N(m, Sigma) data. Empty data returns the
// prior unchanged. Sums use compensated (Kahan) accumulation so that
// permuting the data perturbs the result only at rounding level.
[[nodiscard]] NWHyper normal_wishart_posterior(const NWHyper& hyper,
                                               const std::vector<Vector>& data);

// log Wishart_d(p; degrees, scale) including normalizing constants.
[[nodiscard]] double wishart_logdensity(const Matrix& p, double degrees,
                                        const Matrix& scale);

// log of sum of exp over a contiguous range; -inf entries are ignored.
[[nodiscard]] double logsumexp(const double* begin, const double* end);
[[nodiscard]] double logsumexp(const std::vector<double>& values);

}  // namespace bvmem
