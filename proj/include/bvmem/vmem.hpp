// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <string>
#include <vector>

#include "bvmem/stats.hpp"

namespace bvmem {

// Conditional-mean parameters of mu_t = omega + B mu_{t-1} + A x_{t-1}.
// The flattened vector eta is (omega, vec B, vec A) with column-major vecs,
// so its length is d + 2 d^2.
struct MeanParams {
  Vector omega;
  Matrix B;
  Matrix A;

  [[nodiscard]] Eigen::Index dim() const { return omega.size(); }
};

[[nodiscard]] Vector to_eta(const MeanParams& params);
[[nodiscard]] MeanParams from_eta(const Vector& eta, Eigen::Index d);
[[nodiscard]] std::vector<std::string> eta_names(Eigen::Index d);

// T x d panel of strictly positive observations, row t = x_t.
struct SeriesMatrix {
  Matrix values;
  std::vector<std::string> timestamps;

  [[nodiscard]] Eigen::Index length() const { return values.rows(); }
  [[nodiscard]] Eigen::Index dim() const { return values.cols(); }
};

void validate(const SeriesMatrix& series);

// Finite mixture of log-normal kernels used as a simulation innovation law.
struct InnovationSpec {
  std::vector<double> weights;
  std::vector<MixtureComponent> components;
};

void validate(const InnovationSpec& innov);

// E[eps] = sum_j w_j exp(m_j + diag(Sigma_j)/2), coordinate-wise.
[[nodiscard]] Vector innovation_mean(const InnovationSpec& innov);

// Conditional means for the whole sample. Row 1 is mu1; later rows follow
// the recursion whether or not they stay positive. firstNonPositive is the
// 0-based time index of the first row with a coordinate <= 0, or -1.
struct MeanRecursion {
  Matrix means;
  Eigen::Index firstNonPositive = -1;

  [[nodiscard]] bool allPositive() const { return firstNonPositive < 0; }
};

[[nodiscard]] MeanRecursion mean_recursion(const MeanParams& params,
                                           const SeriesMatrix& series,
                                           const Vector& mu1);

// 1 - spectral radius of B + A; positive iff the sufficient stationarity
// condition holds.
[[nodiscard]] double stationarity_margin(const MeanParams& params);

// Unconditional mean (I - B - A)^-1 (omega ⊙ E[eps]) of a stationary model
// with unit-mean innovations scaled by epsMean.
[[nodiscard]] Vector fixed_point(const MeanParams& params,
                                 const Vector& epsMean);

struct SimulationResult {
  SeriesMatrix series;
  Matrix innovations;
  Matrix means;
};

// Forward simulation of x_t = mu_t ⊙ eps_t. Aborts if the recursion leaves
// the positive orthant (the product could not remain positive).
[[nodiscard]] SimulationResult simulate(const MeanParams& params,
                                        const InnovationSpec& innov,
                                        Eigen::Index T, const Vector& mu1,
                                        Rng& rng);

struct Residuals {
  Matrix eps;
  Matrix logEps;
};

// eps_t = x_t ⊘ mu_t and its log. Requires every conditional mean positive.
[[nodiscard]] Residuals residuals(const MeanParams& params,
                                  const SeriesMatrix& series,
                                  const Vector& mu1);

// Log-likelihood of the series under mean parameters and a finite log-normal
// mixture innovation density (weights need not sum to one: truncated
// mixtures are evaluated as-is). Returns -inf when any conditional mean is
// non-positive.
[[nodiscard]] double mixture_loglik(const MeanParams& params,
                                    const std::vector<double>& weights,
                                    const std::vector<MixtureComponent>& comps,
                                    const SeriesMatrix& series,
                                    const Vector& mu1);

// Column means of the series; the default mu1 for fitting.
[[nodiscard]] Vector sample_mean(const SeriesMatrix& series);

}  // namespace bvmem
