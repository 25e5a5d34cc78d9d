// Apache License, Version 2.0, refer to LICENSE.txt

#include "bvmem/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Cholesky>

namespace bvmem {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kDensityFloor = 1e-300;

// Streaming log-sum-exp so the T x N density matrix never has to be stored.
struct OnlineLse {
  double best = kNegInf;
  double sum = 0.0;

  void add(double x) {
    if (x == kNegInf) return;
    if (best == kNegInf) {
      best = x;
      sum = 1.0;
    } else if (x > best) {
      sum = sum * std::exp(best - x) + 1.0;
      best = x;
    } else {
      sum += std::exp(x - best);
    }
  }

  [[nodiscard]] double value() const {
    return best == kNegInf ? kNegInf : best + std::log(sum);
  }
};

struct KernelFactors {
  std::vector<Eigen::LLT<Matrix>> factors;
  std::vector<double> logdets;
  std::vector<double> logWeights;
};

KernelFactors factor_components(const std::vector<double>& weights,
                                const std::vector<MixtureComponent>& comps) {
  KernelFactors out;
  out.factors.reserve(comps.size());
  out.logdets.reserve(comps.size());
  out.logWeights.reserve(comps.size());
  for (std::size_t j = 0; j < comps.size(); ++j) {
    const double w = j < weights.size() ? weights[j] : 0.0;
    out.logWeights.push_back(w > 0.0 ? std::log(w) : kNegInf);
    if (w > 0.0) {
      out.factors.push_back(cholesky_pd(comps[j].scale));
      out.logdets.push_back(cholesky_logdet(out.factors.back()));
    } else {
      out.factors.emplace_back();
      out.logdets.push_back(0.0);
    }
  }
  return out;
}

// log f(x_t | draw) for the scored observation, or -inf when the draw's
// conditional mean is not strictly positive at t.
double draw_logdensity(const EvalDraw& draw, const KernelFactors& kf,
                       const Vector& xRow, const Vector& logXRow,
                       Eigen::Index t) {
  const Eigen::Index d = xRow.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(draw.means(t, i) > 0.0)) return kNegInf;
  }
  Vector y(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    y(i) = logXRow(i) - std::log(draw.means(t, i));
  }
  std::vector<double> terms;
  terms.reserve(draw.components.size());
  for (std::size_t j = 0; j < draw.components.size(); ++j) {
    if (kf.logWeights[j] == kNegInf) continue;
    terms.push_back(kf.logWeights[j] +
                    mvn_logdensity(y, draw.components[j].location,
                                   kf.factors[j], kf.logdets[j]));
  }
  if (terms.empty()) return kNegInf;
  return -logXRow.sum() + logsumexp(terms);
}

std::uint64_t fnv1a(const unsigned char* bytes, std::size_t n,
                    std::uint64_t h) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::vector<EvalDraw> eval_draws(const std::vector<IdentifiedDraw>& draws,
                                 const SeriesMatrix& series,
                                 const Vector& mu1Base) {
  validate(series);
  require(mu1Base.size() == series.dim(), "mu1 dimension mismatch");
  std::vector<EvalDraw> out;
  out.reserve(draws.size());
  // Thinned chains revisit identical eta values only when the walk stalls,
  // but when they do the recursion is the expensive part, so reuse it.
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> seen;
  for (const IdentifiedDraw& draw : draws) {
    require(draw.eta.dim() == series.dim(), "draw dimension mismatch");
    EvalDraw ev;
    ev.weights = draw.weights;
    ev.components = draw.components;
    std::uint64_t h = 1469598103934665603ULL;
    const Vector eta = to_eta(draw.eta);
    h = fnv1a(reinterpret_cast<const unsigned char*>(eta.data()),
              sizeof(double) * static_cast<std::size_t>(eta.size()), h);
    h = fnv1a(reinterpret_cast<const unsigned char*>(draw.mixtureMean.data()),
              sizeof(double) * static_cast<std::size_t>(draw.mixtureMean.size()),
              h);
    bool reused = false;
    for (std::size_t idx : seen[h]) {
      // Hash hit; confirm against the stored draw before reusing.
      if (to_eta(draws[idx].eta) == eta &&
          draws[idx].mixtureMean == draw.mixtureMean) {
        ev.means = out[idx].means;
        reused = true;
        break;
      }
    }
    if (!reused) {
      const Vector mu1 = draw.mixtureMean.cwiseProduct(mu1Base);
      ev.means = mean_recursion(draw.eta, series, mu1).means;
      seen[h].push_back(out.size());
    }
    out.push_back(std::move(ev));
  }
  return out;
}

EvalDraw eval_draw_single(const MeanParams& eta, const Matrix& sigma,
                          const SeriesMatrix& series, const Vector& mu1) {
  EvalDraw ev;
  ev.weights = {1.0};
  MixtureComponent comp;
  comp.location = -0.5 * sigma.diagonal();
  comp.scale = sigma;
  ev.components = {comp};
  ev.means = mean_recursion(eta, series, mu1).means;
  return ev;
}

PredictiveScores predictive_scores(const std::vector<EvalDraw>& draws,
                                   const SeriesMatrix& series) {
  validate(series);
  require(!draws.empty(), "no draws to score");
  const Eigen::Index T = series.length();
  const Eigen::Index d = series.dim();
  const Matrix logX = series.values.array().log();
  std::vector<OnlineLse> lpsAcc(static_cast<std::size_t>(T));
  std::vector<OnlineLse> cpoAcc(static_cast<std::size_t>(T));
  ScoreDiagnostics diag;
  for (const EvalDraw& draw : draws) {
    require(draw.means.rows() == T && draw.means.cols() == d,
            "draw means shape mismatch");
    const KernelFactors kf = factor_components(draw.weights, draw.components);
    for (Eigen::Index t = 0; t < T; ++t) {
      const double lf =
          draw_logdensity(draw, kf, series.values.row(t), logX.row(t), t);
      if (lf == kNegInf) ++diag.zeroDensityTerms;
      lpsAcc[static_cast<std::size_t>(t)].add(lf);
      double floored = lf;
      if (!(floored > std::log(kDensityFloor))) {
        floored = std::log(kDensityFloor);
        if (lf != kNegInf) ++diag.flooredCpoTerms;
      }
      cpoAcc[static_cast<std::size_t>(t)].add(-floored);
    }
  }
  const double logN = std::log(static_cast<double>(draws.size()));
  double lpsSum = 0.0;
  double lpmlSum = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    const double mix = lpsAcc[static_cast<std::size_t>(t)].value();
    if (mix == kNegInf) {
      throw std::domain_error(
          "every draw assigns zero density at observation " +
          std::to_string(t));
    }
    lpsSum += mix - logN;
    lpmlSum += logN - cpoAcc[static_cast<std::size_t>(t)].value();
  }
  PredictiveScores out;
  out.lps = -lpsSum / static_cast<double>(T);
  out.lpml = -lpmlSum / static_cast<double>(T);
  out.diagnostics = diag;
  return out;
}

double lps(const std::vector<EvalDraw>& draws, const SeriesMatrix& series,
           ScoreDiagnostics* diagnostics) {
  const PredictiveScores s = predictive_scores(draws, series);
  if (diagnostics != nullptr) *diagnostics = s.diagnostics;
  return s.lps;
}

double lpml(const std::vector<EvalDraw>& draws, const SeriesMatrix& series,
            ScoreDiagnostics* diagnostics) {
  const PredictiveScores s = predictive_scores(draws, series);
  if (diagnostics != nullptr) *diagnostics = s.diagnostics;
  return s.lpml;
}

double predictive_innovation_density(const std::vector<IdentifiedDraw>& draws,
                                     const Vector& e) {
  require(!draws.empty(), "no draws");
  double acc = 0.0;
  for (const IdentifiedDraw& draw : draws) {
    double mass = 0.0;
    for (double w : draw.weights) mass += w;
    require(mass > 0.99, "draw retains too little mixture mass");
    double value = 0.0;
    for (std::size_t j = 0; j < draw.components.size(); ++j) {
      const double w = j < draw.weights.size() ? draw.weights[j] : 0.0;
      if (w <= 0.0) continue;
      value += w * logn_density(e, draw.components[j]);
    }
    acc += value;
  }
  return acc / static_cast<double>(draws.size());
}

Vector mixture_marginal_density(const std::vector<double>& weights,
                                const std::vector<MixtureComponent>& comps,
                                Eigen::Index coord, const Vector& axis) {
  require(coord >= 0, "coordinate out of range");
  Vector out = Vector::Zero(axis.size());
  Vector e(1);
  MixtureComponent marginal;
  marginal.location = Vector(1);
  marginal.scale = Matrix(1, 1);
  for (std::size_t j = 0; j < comps.size(); ++j) {
    const double w = j < weights.size() ? weights[j] : 0.0;
    if (w <= 0.0) continue;
    require(coord < comps[j].dim(), "coordinate out of range");
    marginal.location(0) = comps[j].location(coord);
    marginal.scale(0, 0) = comps[j].scale(coord, coord);
    for (Eigen::Index g = 0; g < axis.size(); ++g) {
      e(0) = axis(g);
      out(g) += w * logn_density(e, marginal);
    }
  }
  return out;
}

Vector predictive_marginal_density(const std::vector<IdentifiedDraw>& draws,
                                   Eigen::Index coord, const Vector& axis) {
  require(!draws.empty(), "no draws");
  Vector out = Vector::Zero(axis.size());
  for (const IdentifiedDraw& draw : draws) {
    out += mixture_marginal_density(draw.weights, draw.components, coord,
                                    axis);
  }
  return out / static_cast<double>(draws.size());
}

double trapezoid(const Vector& axis, const Vector& values) {
  require(axis.size() == values.size() && axis.size() >= 2,
          "grid shape mismatch");
  double acc = 0.0;
  for (Eigen::Index g = 1; g < axis.size(); ++g) {
    acc += 0.5 * (axis(g) - axis(g - 1)) * (values(g) + values(g - 1));
  }
  return acc;
}

EssResult ess(const std::vector<double>& trace) {
  const std::size_t n = trace.size();
  require(n >= 2, "trace too short");
  const double nd = static_cast<double>(n);
  double mean = 0.0;
  for (double v : trace) mean += v;
  mean /= nd;
  std::vector<double> centered(n);
  for (std::size_t t = 0; t < n; ++t) centered[t] = trace[t] - mean;
  auto gamma = [&](std::size_t k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) acc += centered[t] * centered[t + k];
    return acc / nd;
  };
  const double g0 = gamma(0);
  EssResult out;
  if (!(g0 > 0.0)) {
    out.value = nd;
    out.zeroVariance = true;
    return out;
  }
  // Geyer's initial monotone sequence: add adjacent-pair autocorrelation
  // sums while they stay positive, clamping each to the previous pair so
  // noise at long lags cannot push the estimate back up.
  double tau = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < n; k += 2) {
    double pair = (gamma(k) + gamma(k + 1)) / g0;
    if (!(pair > 0.0)) break;
    pair = std::min(pair, prev);
    tau += 2.0 * pair;
    prev = pair;
  }
  tau = std::max(tau, 1.0);
  out.value = std::min(nd / tau, nd);
  return out;
}

AcfResult acf(const std::vector<double>& trace, std::size_t maxLag) {
  const std::size_t n = trace.size();
  require(n >= 2, "trace too short");
  require(maxLag < n, "lag exceeds trace length");
  const double nd = static_cast<double>(n);
  double mean = 0.0;
  for (double v : trace) mean += v;
  mean /= nd;
  std::vector<double> centered(n);
  for (std::size_t t = 0; t < n; ++t) centered[t] = trace[t] - mean;
  double g0 = 0.0;
  for (double c : centered) g0 += c * c;
  g0 /= nd;
  AcfResult out;
  out.rho.assign(maxLag + 1, 0.0);
  out.rho[0] = 1.0;
  if (!(g0 > 0.0)) {
    out.zeroVariance = true;
    return out;
  }
  for (std::size_t k = 1; k <= maxLag; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) acc += centered[t] * centered[t + k];
    out.rho[k] = acc / (nd * g0);
  }
  return out;
}

std::pair<double, double> credible_interval(std::vector<double> trace,
                                            double level) {
  require(!trace.empty(), "empty trace");
  require(level > 0.0 && level < 1.0, "level must lie in (0, 1)");
  std::sort(trace.begin(), trace.end());
  const auto quantile = [&](double p) {
    const double h = p * (static_cast<double>(trace.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, trace.size() - 1);
    const double frac = h - std::floor(h);
    return trace[lo] + frac * (trace[hi] - trace[lo]);
  };
  const double tail = 0.5 * (1.0 - level);
  return {quantile(tail), quantile(1.0 - tail)};
}

FitReport fit_report(const std::vector<IdentifiedDraw>& draws,
                     const SeriesMatrix& series, const Vector& mu1Base) {
  require(!draws.empty(), "no draws");
  const Eigen::Index d = draws.front().eta.dim();
  const Eigen::Index m = d + 2 * d * d;
  FitReport report;
  report.parameterNames = eta_names(d);
  report.posteriorMeans = Vector::Zero(m);
  report.essPerParam = Vector::Zero(m);
  std::vector<std::vector<double>> traces(
      static_cast<std::size_t>(m),
      std::vector<double>(draws.size(), 0.0));
  for (std::size_t s = 0; s < draws.size(); ++s) {
    const Vector eta = to_eta(draws[s].eta);
    require(eta.size() == m, "inconsistent draw dimensions");
    for (Eigen::Index i = 0; i < m; ++i) {
      traces[static_cast<std::size_t>(i)][s] = eta(i);
    }
  }
  report.credibleIntervals.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::vector<double>& tr = traces[static_cast<std::size_t>(i)];
    double mean = 0.0;
    for (double v : tr) mean += v;
    report.posteriorMeans(i) = mean / static_cast<double>(tr.size());
    report.credibleIntervals[static_cast<std::size_t>(i)] =
        credible_interval(tr, 0.95);
    report.essPerParam(i) = ess(tr).value;
  }
  const PredictiveScores scores =
      predictive_scores(eval_draws(draws, series, mu1Base), series);
  report.lps = scores.lps;
  report.lpml = scores.lpml;
  return report;
}

}  // namespace bvmem
