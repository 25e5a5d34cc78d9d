// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <vector>

#include "bvmem/stats.hpp"
#include "bvmem/vmem.hpp"

namespace bvmem {

// Truncation of a stick-breaking mixture: K components retained, and the
// stick mass left beyond them.
struct TruncationReport {
  std::size_t K = 0;
  double residualMass = 0.0;
};

// Smallest K whose residual stick mass falls below eps, measured on the
// sticks already present. Throws if the list is too short to reach eps.
[[nodiscard]] TruncationReport truncation_level(const StickState& sticks,
                                                double eps);

// Appends Beta(1, alpha) prior sticks until the residual mass condition
// holds, then reports the truncation. The stick list is never shortened.
TruncationReport extend_sticks_to_mass(StickState& sticks, double eps,
                                       Rng& rng);

// Appends prior Normal-Wishart draws until the component list covers K.
void extend_components_to(std::vector<MixtureComponent>& components,
                          std::size_t K, const NWHyper& hyper, Rng& rng);

// Truncated mixture mean sum_{j<=K} w_j exp(m_j + diag(Sigma_j)/2),
// evaluated with log-sum-exp stabilization per coordinate.
[[nodiscard]] Vector mixture_mean(const std::vector<double>& weights,
                                  const std::vector<MixtureComponent>& comps,
                                  std::size_t K);

// A posterior draw mapped to the identified (unit innovation mean) model.
// Weights stay truncated, not renormalized; mixtureMean records the map.
struct IdentifiedDraw {
  MeanParams eta;
  std::vector<MixtureComponent> components;
  std::vector<double> weights;
  Vector mixtureMean;
  TruncationReport truncation;
};

// Rescaling of the mean recursion by the diagonal map D = diag(mbar):
// omega -> D omega, A -> D A, B -> D B D^-1. Together with recentered
// kernels and a rescaled mu1 this leaves the data density unchanged.
[[nodiscard]] MeanParams identify_eta(const MeanParams& params,
                                      const Vector& mbar);

// Maps one raw draw (eta, sticks, components) to the identified model.
// The stick list must already satisfy the eps mass condition (the sampler
// extends its snapshots before emitting them), so this is deterministic.
[[nodiscard]] IdentifiedDraw identify(const MeanParams& eta,
                                      const StickState& sticks,
                                      const std::vector<MixtureComponent>&
                                          components,
                                      double eps);

}  // namespace bvmem
