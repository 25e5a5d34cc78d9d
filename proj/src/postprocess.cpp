// Apache License, Version 2.0, refer to LICENSE.txt
#include "bvmem/postprocess.hpp"

#include <cmath>
#include <string>

namespace bvmem {

TruncationReport truncation_level(const StickState& sticks, double eps) {
  require(eps > 0.0 && eps < 1.0, "truncation_level: eps must be in (0,1)");
  // 1 - sum_{j<=k} w_j telescopes to prod_{j<=k} (1 - v_j).
  double residual = 1.0;
  for (std::size_t k = 0; k < sticks.size(); ++k) {
    residual *= 1.0 - sticks.sticks[k];
    if (residual < eps) return {k + 1, residual};
  }
  throw std::invalid_argument(
      "truncation_level: stick list too short for requested eps");
}

TruncationReport extend_sticks_to_mass(StickState& sticks, double eps,
                                       Rng& rng) {
  require(eps > 0.0 && eps < 1.0,
          "extend_sticks_to_mass: eps must be in (0,1)");
  // Walk the existing sticks first; extend with Beta(1, alpha) prior draws
  // only if they are not enough.
  double residual = 1.0;
  std::size_t needed = 0;
  for (std::size_t j = 0; j < sticks.sticks.size(); ++j) {
    residual *= 1.0 - sticks.sticks[j];
    ++needed;
    if (residual < eps) return {needed, residual};
  }
  while (residual >= eps) {
    const double v = rng.beta(1.0, sticks.concentration);
    sticks.sticks.push_back(v);
    residual *= 1.0 - v;
    ++needed;
  }
  sticks.rebuild_weights();
  return {needed, residual};
}

void extend_components_to(std::vector<MixtureComponent>& components,
                          std::size_t K, const NWHyper& hyper, Rng& rng) {
  while (components.size() < K) {
    components.push_back(normal_wishart_sample(hyper, rng));
  }
}

Vector mixture_mean(const std::vector<double>& weights,
                    const std::vector<MixtureComponent>& comps,
                    std::size_t K) {
  require(K >= 1 && K <= weights.size() && K <= comps.size(),
          "mixture_mean: truncation exceeds available components");
  const auto d = comps.front().dim();
  Vector out(d);
  std::vector<double> terms(K);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < K; ++j) {
      const double exponent =
          comps[j].location(i) + 0.5 * comps[j].scale(i, i);
      if (exponent > 700.0) {
        throw std::overflow_error(
            "mixture_mean: divergent component scale at index " +
            std::to_string(j));
      }
      terms[j] = std::log(weights[j]) + exponent;
    }
    out(i) = std::exp(logsumexp(terms));
  }
  return out;
}

MeanParams identify_eta(const MeanParams& params, const Vector& mbar) {
  MeanParams out;
  out.omega = params.omega.array() * mbar.array();
  out.A = mbar.asDiagonal() * params.A;
  out.B = mbar.asDiagonal() * params.B * mbar.cwiseInverse().asDiagonal();
  return out;
}

IdentifiedDraw identify(const MeanParams& eta, const StickState& sticks,
                        const std::vector<MixtureComponent>& components,
                        double eps) {
  const TruncationReport trunc = truncation_level(sticks, eps);
  require(components.size() >= trunc.K,
          "identify: component list does not cover the truncation level");

  const std::vector<double> weights = stick_break(sticks.sticks, trunc.K);
  const Vector mbar = mixture_mean(weights, components, trunc.K);

  IdentifiedDraw draw;
  draw.eta = identify_eta(eta, mbar);
  draw.weights = weights;
  draw.mixtureMean = mbar;
  draw.truncation = trunc;
  const Vector logMbar = mbar.array().log();
  draw.components.reserve(trunc.K);
  for (std::size_t j = 0; j < trunc.K; ++j) {
    draw.components.push_back(
        {components[j].location - logMbar, components[j].scale});
  }
  return draw;
}

}  // namespace bvmem
