// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bvmem/postprocess.hpp"
#include "bvmem/stats.hpp"
#include "bvmem/vmem.hpp"

namespace bvmem {

// Running statistics for the adaptive random-walk proposal, accumulated
// over identified (post-processed) eta draws.
struct AdaptState {
  Vector runningMean;
  Matrix runningScatter;
  long count = 0;
  double mixtureWeight = 0.9;
  double sigma1 = 1.0;
  double sigma2 = 0.0;
};

struct SamplerConfig {
  long iterations = 30000;
  long burnIn = 5000;
  long thin = 10;
  double alpha = 1.0;
  double epsMeanTrunc = 1e-6;
  NWHyper nwHyper;  // empty scaleMatrix means: use default_nw_hyper(d)
  double etaPriorVariance = 20.0;
  double proposalWeight = 0.9;
  double proposalScale1 = 1.0;
  double proposalScale2 = 0.0;  // non-positive means: use sqrt(d + 2d^2)
  // Optional warm start for the adaptive proposal covariance, treated as
  // a pseudo-sample of adaptSeedWeight identified draws centered at the
  // initial eta. It decays like any other adaptation history; an empty
  // matrix or a weight below 2 keeps the cold start.
  Matrix adaptCovarianceSeed;
  long adaptSeedWeight = 0;
  std::uint64_t seed = 1;
};

// a = 10 + d, W = I, nu = 0, n0 = 1.
[[nodiscard]] NWHyper default_nw_hyper(Eigen::Index d);

// Full Gibbs state. Labels are 1-based (label k refers to sticks[k-1]);
// the stick and component lists always cover the largest label, growing
// lazily when the label step demands deeper indices.
struct ChainState {
  MeanParams eta;
  StickState sticks;
  std::vector<MixtureComponent> components;
  std::vector<int> labels;
  std::vector<double> slices;
  AdaptState adapt;
  long iteration = 0;
};

// Slice decay sequence xi_k = (1/alpha) * (2 alpha / (3 + 3 alpha))^k.
// The label step's support bound floor(log_r(alpha * u)) is only valid
// with exactly this constant.
[[nodiscard]] double xi(long k, double alpha);

// u_t ~ U(0, xi(l_t)) independently per t.
void step_slices(ChainState& state, Rng& rng);

// v_j ~ Beta(1 + n_j, alpha + g_j) for every instantiated j, where
// n_j = #{t: l_t = j} and g_j = #{t: l_t > j}; weights rebuilt.
void step_sticks(ChainState& state, Rng& rng);

// (m_j, Sigma_j) from the Normal-Wishart posterior over the log-residuals
// currently assigned to cluster j; empty clusters redraw from the prior.
void step_components(ChainState& state, const Matrix& logResiduals,
                     const NWHyper& hyper, Rng& rng);

// Exact categorical draw of l_t over the slice-bounded candidate set,
// P(l_t = k) proportional to 1(xi_k > u_t) (w_k / xi_k) N(y_t; m_k, Sigma_k).
void step_labels(ChainState& state, const Matrix& logResiduals,
                 const NWHyper& hyper, Rng& rng);

// Shared Metropolis acceptance rule: accept iff log U < logRatio.
[[nodiscard]] bool metropolis_accept(double logRatio, Rng& rng);

// Welford update of the adaptation statistics with one identified eta.
void update_adaptation(AdaptState& adapt, const Vector& identifiedEta);

// Lambda_n = SigmaHat ⊘ (c c^T) + 1e-6 I with c = (mbar, 1_{d^2}, mbar
// repeated d times); plain 1e-6 I until two draws have been accumulated.
[[nodiscard]] Matrix proposal_cov(const AdaptState& adapt, const Vector& mbar,
                                  Eigen::Index d);

// Random-walk Metropolis update of eta under the mixture likelihood with
// prior N(0, etaPriorVariance * I). Proposals whose recursion leaves the
// positive orthant are rejected outright. Returns the acceptance flag.
bool step_eta(ChainState& state, const SeriesMatrix& series,
              const Matrix& logSeries, const Matrix& logResiduals,
              const Vector& mu1, const SamplerConfig& config,
              const Vector& mbar, Rng& rng);

struct RunDiagnostics {
  std::vector<int> maxComponents;
  std::vector<int> activeComponents;
  std::vector<int> truncationLevel;
  long acceptedEta = 0;
  long etaProposals = 0;
  Vector mu1;
};

// Executes the five-step sweep (slices, sticks, components, labels, eta)
// plus the adaptation update for the configured number of iterations.
// Thinned post-burn-in snapshots are passed to emit with their stick and
// component lists already extended past the truncation level, so that
// identify(snapshot) is a pure function of the snapshot. Deterministic
// for a given config.seed.
RunDiagnostics run(const SamplerConfig& config, const SeriesMatrix& series,
                   const MeanParams& etaInit,
                   const std::function<void(const ChainState&)>& emit,
                   const Vector& mu1Override = Vector());

// Post-processing entry point for emitted snapshots.
[[nodiscard]] IdentifiedDraw identify(const ChainState& state, double eps);

}  // namespace bvmem
