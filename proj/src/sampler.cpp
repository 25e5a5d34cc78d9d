// Apache License, Version 2.0, refer to LICENSE.txt
#include "bvmem/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace bvmem {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Per-sweep cache of component Cholesky factors.
struct KernelCache {
  std::vector<std::optional<Eigen::LLT<Matrix>>> factors;
  std::vector<double> logdets;

  void resize(std::size_t n) {
    factors.resize(n);
    logdets.resize(n);
  }

  const Eigen::LLT<Matrix>& factor(const std::vector<MixtureComponent>& comps,
                                   std::size_t j) {
    if (!factors[j]) {
      factors[j] = cholesky_pd(comps[j].scale);
      logdets[j] = cholesky_logdet(*factors[j]);
    }
    return *factors[j];
  }
};

int max_label(const std::vector<int>& labels) {
  int best = 0;
  for (const int l : labels) best = std::max(best, l);
  return best;
}

void check_lists(const ChainState& state) {
  require(state.sticks.size() == state.components.size(),
          "sampler: stick and component lists out of sync");
  require(static_cast<int>(state.sticks.size()) >= max_label(state.labels),
          "sampler: lists do not cover the largest label");
}

// Appends prior sticks and components so that the lists reach `upTo`.
void extend_lists(ChainState& state, std::size_t upTo, const NWHyper& hyper,
                  Rng& rng) {
  while (state.sticks.size() < upTo) {
    state.sticks.sticks.push_back(rng.beta(1.0, state.sticks.concentration));
    state.components.push_back(normal_wishart_sample(hyper, rng));
  }
  state.sticks.rebuild_weights();
}

// Log target of the eta block: N(0, priorVariance I) prior plus the
// Gaussian log-likelihood of the log-residuals under the current cluster
// assignment. eta-free constants are kept; they cancel in the ratio.
double eta_log_target(const MeanParams& params, const SeriesMatrix& series,
                      const Matrix& logSeries, const Vector& mu1,
                      const std::vector<int>& labels,
                      const std::vector<MixtureComponent>& comps,
                      KernelCache& cache, double priorVariance) {
  const auto rec = mean_recursion(params, series, mu1);
  if (!rec.allPositive()) return kNegInf;
  const Vector eta = to_eta(params);
  double total = -0.5 * eta.squaredNorm() / priorVariance;
  for (Eigen::Index t = 0; t < series.length(); ++t) {
    const std::size_t j = static_cast<std::size_t>(labels[t]) - 1;
    const Vector y = logSeries.row(t).transpose() -
                     rec.means.row(t).transpose().array().log().matrix();
    const auto& llt = cache.factor(comps, j);
    total += mvn_logdensity(y, comps[j].location, llt, cache.logdets[j]);
  }
  return total;
}

}  // namespace

NWHyper default_nw_hyper(Eigen::Index d) {
  NWHyper hyper;
  hyper.degrees = 10.0 + static_cast<double>(d);
  hyper.scaleMatrix = Matrix::Identity(d, d);
  hyper.priorMean = Vector::Zero(d);
  hyper.priorPrecisionScale = 1.0;
  return hyper;
}

double xi(long k, double alpha) {
  require(k >= 1, "xi: index must be >= 1");
  require(alpha > 0.0, "xi: alpha must be > 0");
  const double r = 2.0 * alpha / (3.0 + 3.0 * alpha);
  return std::pow(r, static_cast<double>(k)) / alpha;
}

void step_slices(ChainState& state, Rng& rng) {
  const double alpha = state.sticks.concentration;
  for (std::size_t t = 0; t < state.labels.size(); ++t) {
    state.slices[t] = rng.uniform(0.0, xi(state.labels[t], alpha));
  }
}

void step_sticks(ChainState& state, Rng& rng) {
  check_lists(state);
  const std::size_t K = state.sticks.size();
  const double alpha = state.sticks.concentration;
  // n_j and g_j by histogram plus suffix sums over the labels.
  std::vector<long> counts(K, 0);
  for (int l : state.labels) counts[static_cast<std::size_t>(l) - 1]++;
  long beyond = 0;
  std::vector<long> greater(K, 0);
  for (std::size_t j = K; j-- > 0;) {
    greater[j] = beyond;
    beyond += counts[j];
  }
  for (std::size_t j = 0; j < K; ++j) {
    state.sticks.sticks[j] = rng.beta(1.0 + static_cast<double>(counts[j]),
                                      alpha + static_cast<double>(greater[j]));
  }
  state.sticks.rebuild_weights();
}

void step_components(ChainState& state, const Matrix& logResiduals,
                     const NWHyper& hyper, Rng& rng) {
  check_lists(state);
  const std::size_t K = state.sticks.size();
  std::vector<std::vector<Vector>> assigned(K);
  for (std::size_t t = 0; t < state.labels.size(); ++t) {
    assigned[static_cast<std::size_t>(state.labels[t]) - 1].push_back(
        logResiduals.row(static_cast<Eigen::Index>(t)).transpose());
  }
  for (std::size_t j = 0; j < K; ++j) {
    try {
      state.components[j] =
          normal_wishart_sample(normal_wishart_posterior(hyper, assigned[j]),
                                rng);
    } catch (const linalg_error& err) {
      throw linalg_error("step_components: cluster " + std::to_string(j + 1) +
                         ": " + err.what());
    }
  }
}

void step_labels(ChainState& state, const Matrix& logResiduals,
                 const NWHyper& hyper, Rng& rng) {
  check_lists(state);
  const double alpha = state.sticks.concentration;
  const double r = 2.0 * alpha / (3.0 + 3.0 * alpha);
  const double logr = std::log(r);

  KernelCache cache;
  cache.resize(state.sticks.size());
  std::vector<double> logprob;
  for (std::size_t t = 0; t < state.labels.size(); ++t) {
    const double u = state.slices[t];
    // Deepest index whose xi still exceeds u, with a float-safety nudge
    // around the closed-form bound.
    long kmax = static_cast<long>(std::floor(std::log(alpha * u) / logr));
    kmax = std::max<long>(kmax, 1);
    while (xi(kmax + 1, alpha) > u) ++kmax;
    while (kmax > 1 && xi(kmax, alpha) <= u) --kmax;

    if (state.sticks.size() < static_cast<std::size_t>(kmax)) {
      extend_lists(state, static_cast<std::size_t>(kmax), hyper, rng);
      cache.resize(state.sticks.size());
    }

    const Vector y = logResiduals.row(static_cast<Eigen::Index>(t)).transpose();
    logprob.assign(static_cast<std::size_t>(kmax), kNegInf);
    for (long k = 1; k <= kmax; ++k) {
      const double xik = xi(k, alpha);
      if (!(xik > u)) continue;
      const std::size_t j = static_cast<std::size_t>(k) - 1;
      const double w = state.sticks.weights[j];
      if (!(w > 0.0)) continue;
      const auto& llt = cache.factor(state.components, j);
      logprob[j] = std::log(w) - std::log(xik) +
                   mvn_logdensity(y, state.components[j].location, llt,
                                  cache.logdets[j]);
    }

    const double norm = logsumexp(logprob);
    if (norm == kNegInf) {
      throw std::logic_error(
          "step_labels: empty candidate support (broken slice invariant)");
    }
    const double target = rng.uniform();
    double cum = 0.0;
    int picked = -1;
    for (std::size_t j = 0; j < logprob.size(); ++j) {
      if (logprob[j] == kNegInf) continue;
      cum += std::exp(logprob[j] - norm);
      picked = static_cast<int>(j) + 1;
      if (target <= cum) break;
    }
    state.labels[t] = picked;
  }
}

bool metropolis_accept(double logRatio, Rng& rng) {
  return std::log(rng.uniform()) < logRatio;
}

void update_adaptation(AdaptState& adapt, const Vector& identifiedEta) {
  if (adapt.count == 0) {
    adapt.runningMean = Vector::Zero(identifiedEta.size());
    adapt.runningScatter =
        Matrix::Zero(identifiedEta.size(), identifiedEta.size());
  }
  adapt.count += 1;
  const double n = static_cast<double>(adapt.count);
  const Vector delta = identifiedEta - adapt.runningMean;
  adapt.runningMean += delta / n;
  adapt.runningScatter += ((n - 1.0) / n) * delta * delta.transpose();
}

Matrix proposal_cov(const AdaptState& adapt, const Vector& mbar,
                    Eigen::Index d) {
  const Eigen::Index m = d + 2 * d * d;
  if (adapt.count < 2) return 1e-6 * Matrix::Identity(m, m);
  Vector c(m);
  c.head(d) = mbar;
  c.segment(d, d * d).setOnes();
  for (Eigen::Index j = 0; j < d; ++j) c.segment(d + d * d + j * d, d) = mbar;
  const Matrix sigmaHat =
      adapt.runningScatter / static_cast<double>(adapt.count - 1);
  Matrix lambda = sigmaHat.array() / (c * c.transpose()).array();
  lambda += 1e-6 * Matrix::Identity(m, m);
  return lambda;
}

bool step_eta(ChainState& state, const SeriesMatrix& series,
              const Matrix& logSeries, const Matrix& logResiduals,
              const Vector& mu1, const SamplerConfig& config,
              const Vector& mbar, Rng& rng) {
  const auto d = series.dim();
  const Eigen::Index m = d + 2 * d * d;

  const Matrix lambda = proposal_cov(state.adapt, mbar, d);
  const auto llt = cholesky_pd(lambda / static_cast<double>(m));
  const double scale = rng.uniform() < state.adapt.mixtureWeight
                           ? state.adapt.sigma1
                           : state.adapt.sigma2;
  Vector z(m);
  for (Eigen::Index i = 0; i < m; ++i) z(i) = rng.normal();
  const Vector etaCur = to_eta(state.eta);
  const Vector step = llt.matrixL() * z;
  const MeanParams proposal = from_eta(etaCur + scale * step, d);

  KernelCache cache;
  cache.resize(state.components.size());

  // Current target: the log-residuals under the current eta are already
  // in hand, so only the quadratic forms are evaluated.
  double cur = -0.5 * etaCur.squaredNorm() / config.etaPriorVariance;
  for (Eigen::Index t = 0; t < series.length(); ++t) {
    const std::size_t j = static_cast<std::size_t>(state.labels[t]) - 1;
    const auto& fac = cache.factor(state.components, j);
    cur += mvn_logdensity(logResiduals.row(t).transpose(),
                          state.components[j].location, fac,
                          cache.logdets[j]);
  }
  const double prop =
      eta_log_target(proposal, series, logSeries, mu1, state.labels,
                     state.components, cache, config.etaPriorVariance);

  const bool accepted = metropolis_accept(prop - cur, rng);
  if (accepted) state.eta = proposal;
  return accepted;
}

RunDiagnostics run(const SamplerConfig& config, const SeriesMatrix& series,
                   const MeanParams& etaInit,
                   const std::function<void(const ChainState&)>& emit,
                   const Vector& mu1Override) {
  validate(series);
  require(config.iterations > 0 && config.burnIn >= 0 &&
              config.burnIn < config.iterations,
          "run: need 0 <= burnIn < iterations");
  require(config.thin >= 1, "run: thin must be >= 1");
  require(config.alpha > 0.0, "run: alpha must be > 0");
  require(config.epsMeanTrunc > 0.0 && config.epsMeanTrunc < 1.0,
          "run: epsMeanTrunc must be in (0,1)");
  require(config.etaPriorVariance > 0.0,
          "run: etaPriorVariance must be > 0");

  const auto d = series.dim();
  const auto T = series.length();
  const Eigen::Index m = d + 2 * d * d;
  const NWHyper hyper = config.nwHyper.scaleMatrix.size() > 0
                            ? config.nwHyper
                            : default_nw_hyper(d);
  const Vector mu1 =
      mu1Override.size() > 0 ? mu1Override : sample_mean(series);

  Rng rng(config.seed);

  ChainState state;
  state.eta = etaInit;
  {
    const auto rec = mean_recursion(etaInit, series, mu1);
    if (!rec.allPositive()) {
      throw std::domain_error(
          "run: initial eta yields a non-positive conditional mean at t = " +
          std::to_string(rec.firstNonPositive));
    }
  }
  state.sticks.concentration = config.alpha;
  state.sticks.sticks = {rng.beta(1.0, config.alpha)};
  state.sticks.rebuild_weights();
  state.components = {normal_wishart_sample(hyper, rng)};
  state.labels.assign(static_cast<std::size_t>(T), 1);
  state.slices.assign(static_cast<std::size_t>(T),
                      0.5 * xi(1, config.alpha));
  state.adapt.runningMean = Vector::Zero(m);
  state.adapt.runningScatter = Matrix::Zero(m, m);
  if (config.adaptCovarianceSeed.size() > 0 && config.adaptSeedWeight >= 2) {
    require(config.adaptCovarianceSeed.rows() == m &&
                config.adaptCovarianceSeed.cols() == m,
            "run: adaptCovarianceSeed must be m x m");
    const double w = static_cast<double>(config.adaptSeedWeight);
    state.adapt.runningMean = to_eta(etaInit);
    state.adapt.runningScatter = (w - 1.0) * config.adaptCovarianceSeed;
    state.adapt.count = config.adaptSeedWeight;
  }
  state.adapt.mixtureWeight = config.proposalWeight;
  state.adapt.sigma1 = config.proposalScale1;
  state.adapt.sigma2 = config.proposalScale2 > 0.0
                           ? config.proposalScale2
                           : std::sqrt(static_cast<double>(m));

  const Matrix logSeries = series.values.array().log();
  Vector mbar = Vector::Ones(d);

  RunDiagnostics diag;
  diag.mu1 = mu1;
  diag.maxComponents.reserve(static_cast<std::size_t>(config.iterations));
  diag.activeComponents.reserve(static_cast<std::size_t>(config.iterations));
  diag.truncationLevel.reserve(static_cast<std::size_t>(config.iterations));

  for (long iter = 1; iter <= config.iterations; ++iter) {
    state.iteration = iter;
    const auto rec = mean_recursion(state.eta, series, mu1);
    const Matrix logResiduals =
        logSeries - rec.means.array().log().matrix();

    step_slices(state, rng);
    step_sticks(state, rng);
    step_components(state, logResiduals, hyper, rng);
    step_labels(state, logResiduals, hyper, rng);
    diag.etaProposals += 1;
    diag.acceptedEta += step_eta(state, series, logSeries, logResiduals, mu1,
                                 config, mbar, rng)
                            ? 1
                            : 0;

    // Garbage-collect lazily instantiated clusters beyond the labels.
    const int used = max_label(state.labels);
    if (state.sticks.size() > static_cast<std::size_t>(used)) {
      state.sticks.sticks.resize(static_cast<std::size_t>(used));
      state.components.resize(static_cast<std::size_t>(used));
      state.sticks.rebuild_weights();
    }
    std::vector<char> seen(static_cast<std::size_t>(used), 0);
    for (int l : state.labels) seen[static_cast<std::size_t>(l) - 1] = 1;
    const int active =
        static_cast<int>(std::count(seen.begin(), seen.end(), 1));

    // Extend a snapshot of the mixture past the truncation level; the
    // identified eta feeds the adaptation every iteration.
    StickState snapSticks = state.sticks;
    std::vector<MixtureComponent> snapComps = state.components;
    const TruncationReport trunc =
        extend_sticks_to_mass(snapSticks, config.epsMeanTrunc, rng);
    extend_components_to(snapComps, trunc.K, hyper, rng);
    const std::vector<double> weights =
        stick_break(snapSticks.sticks, trunc.K);
    mbar = mixture_mean(weights, snapComps, trunc.K);
    update_adaptation(state.adapt, to_eta(identify_eta(state.eta, mbar)));

    diag.maxComponents.push_back(used);
    diag.activeComponents.push_back(active);
    diag.truncationLevel.push_back(static_cast<int>(trunc.K));

    if (emit && iter > config.burnIn &&
        (iter - config.burnIn) % config.thin == 0) {
      ChainState snapshot = state;
      snapshot.sticks = std::move(snapSticks);
      snapshot.components = std::move(snapComps);
      emit(snapshot);
    }
  }
  return diag;
}

IdentifiedDraw identify(const ChainState& state, double eps) {
  return identify(state.eta, state.sticks, state.components, eps);
}

}  // namespace bvmem
