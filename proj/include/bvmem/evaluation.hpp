// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bvmem/postprocess.hpp"
#include "bvmem/stats.hpp"
#include "bvmem/vmem.hpp"

namespace bvmem {

// One posterior draw prepared for predictive scoring: a truncated innovation
// mixture plus the conditional means it implies for the scored series.
struct EvalDraw {
  std::vector<double> weights;
  std::vector<MixtureComponent> components;
  Matrix means;
};

struct ScoreDiagnostics {
  long zeroDensityTerms = 0;
  long flooredCpoTerms = 0;
};

struct PredictiveScores {
  double lps = 0.0;
  double lpml = 0.0;
  ScoreDiagnostics diagnostics;
};

// Builds scoring draws from identified posterior draws: each draw's means
// come from its identified eta with mu1 = draw.mixtureMean ⊙ mu1Base
// (the recursion start moves with the identification map). Means are
// cached across draws with identical (eta, mixtureMean).
[[nodiscard]] std::vector<EvalDraw> eval_draws(
    const std::vector<IdentifiedDraw>& draws, const SeriesMatrix& series,
    const Vector& mu1Base);

// Single-draw scoring view of a parametric log-normal fit with the
// unit-mean constraint location = -diag(sigma)/2.
[[nodiscard]] EvalDraw eval_draw_single(const MeanParams& eta,
                                        const Matrix& sigma,
                                        const SeriesMatrix& series,
                                        const Vector& mu1);

// LPS and LPML in one pass over the draws (the per-draw densities are
// shared). lps(...) and lpml(...) are convenience views of this.
[[nodiscard]] PredictiveScores predictive_scores(
    const std::vector<EvalDraw>& draws, const SeriesMatrix& series);

// -(1/T) sum_t log[(1/N) sum_n f(x_t | draw n)]; lower is better. A draw
// with a non-positive conditional mean at t contributes density zero there
// (counted in diagnostics); if every draw is zero at some t this throws.
[[nodiscard]] double lps(const std::vector<EvalDraw>& draws,
                         const SeriesMatrix& series,
                         ScoreDiagnostics* diagnostics = nullptr);

// -(1/T) sum_t log CPO_t with CPO_t the harmonic mean of the per-draw
// densities; per-draw densities are floored at 1e-300 (counted). Lower is
// better, matching the sign convention of lps.
[[nodiscard]] double lpml(const std::vector<EvalDraw>& draws,
                          const SeriesMatrix& series,
                          ScoreDiagnostics* diagnostics = nullptr);

// Monte Carlo average over draws of the truncated mixture density at e.
// Every draw must retain weight mass above 0.99.
[[nodiscard]] double predictive_innovation_density(
    const std::vector<IdentifiedDraw>& draws, const Vector& e);

// Marginal density of one coordinate of a log-normal mixture on a grid.
[[nodiscard]] Vector mixture_marginal_density(
    const std::vector<double>& weights,
    const std::vector<MixtureComponent>& comps, Eigen::Index coord,
    const Vector& axis);

// Draw-averaged marginal of the posterior predictive innovation density.
[[nodiscard]] Vector predictive_marginal_density(
    const std::vector<IdentifiedDraw>& draws, Eigen::Index coord,
    const Vector& axis);

struct DensityGrid {
  std::vector<Vector> axes;
  Vector values;
};

// Trapezoid integral against an (unevenly spaced) axis.
[[nodiscard]] double trapezoid(const Vector& axis, const Vector& values);

struct EssResult {
  double value = 0.0;
  bool zeroVariance = false;
};

// N / (1 + 2 sum rho_k) with Geyer's initial-positive-sequence rule for
// the truncation; clamped into (0, N].
[[nodiscard]] EssResult ess(const std::vector<double>& trace);

struct AcfResult {
  std::vector<double> rho;
  bool zeroVariance = false;
};

// Direct autocovariance estimate normalized by lag zero; rho[0] == 1.
[[nodiscard]] AcfResult acf(const std::vector<double>& trace,
                            std::size_t maxLag);

// Type-7 (linear interpolation) empirical quantile pair at
// ((1-level)/2, 1-(1-level)/2).
[[nodiscard]] std::pair<double, double> credible_interval(
    std::vector<double> trace, double level = 0.95);

struct FitReport {
  std::vector<std::string> parameterNames;
  Vector posteriorMeans;
  std::vector<std::pair<double, double>> credibleIntervals;
  Vector essPerParam;
  double lps = 0.0;
  double lpml = 0.0;
};

// Posterior summaries over the identified eta draws plus in-sample
// predictive scores.
[[nodiscard]] FitReport fit_report(const std::vector<IdentifiedDraw>& draws,
                                   const SeriesMatrix& series,
                                   const Vector& mu1Base);

}  // namespace bvmem
