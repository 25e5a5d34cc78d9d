// Apache License, Version 2.0, refer to LICENSE.txt

#include "bvmem/baseline.hpp"

#include "bvmem/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>

namespace bvmem {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kBadObjective = 1e100;

// Search vector layout: eta (d + 2d^2 entries) followed by the lower
// Cholesky factor of sigma in column-major order with the diagonal stored
// on the log scale, so every search point maps to a PD sigma.
Eigen::Index chol_len(Eigen::Index d) { return d * (d + 1) / 2; }

Matrix unpack_chol(const Vector& theta, Eigen::Index d, Eigen::Index m) {
  Matrix L = Matrix::Zero(d, d);
  Eigen::Index pos = m;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j; i < d; ++i) {
      const double v = theta(pos++);
      L(i, j) = i == j ? std::exp(v) : v;
    }
  }
  return L;
}

Vector pack(const MeanParams& params, const Matrix& sigma) {
  const Eigen::Index d = params.dim();
  const Eigen::Index m = d + 2 * d * d;
  Vector theta(m + chol_len(d));
  theta.head(m) = to_eta(params);
  const Matrix L = cholesky_pd(sigma).matrixL();
  Eigen::Index pos = m;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j; i < d; ++i) {
      theta(pos++) = i == j ? std::log(L(i, j)) : L(i, j);
    }
  }
  return theta;
}

struct Objective {
  const SeriesMatrix& series;
  Vector mu1;
  LN1Config config;
  Eigen::Index d;
  Eigen::Index m;

  double operator()(const Vector& theta) const {
    const MeanParams params = from_eta(theta.head(m), d);
    const Matrix L = unpack_chol(theta, d, m);
    const Matrix sigma = L * L.transpose();
    const double lp = ln1_logposterior(params, sigma, series, mu1, config);
    if (!std::isfinite(lp)) return kBadObjective;
    return -lp;
  }
};

// Nelder-Mead restricted to the coordinates in idx; x is updated in place
// and the best objective value is returned.
double nelder_mead_block(const std::function<double(const Vector&)>& f,
                         Vector& x, const std::vector<Eigen::Index>& idx,
                         double tol, long maxIter) {
  const std::size_t n = idx.size();
  std::vector<Vector> pts(n + 1, Vector(static_cast<Eigen::Index>(n)));
  std::vector<double> vals(n + 1);
  Vector full = x;
  auto embed = [&](const Vector& p) {
    for (std::size_t i = 0; i < n; ++i) full(idx[i]) = p(static_cast<Eigen::Index>(i));
    return f(full);
  };
  for (std::size_t i = 0; i < n; ++i) {
    pts[0](static_cast<Eigen::Index>(i)) = x(idx[i]);
  }
  vals[0] = embed(pts[0]);
  for (std::size_t i = 1; i <= n; ++i) {
    pts[i] = pts[0];
    const double base = pts[0](static_cast<Eigen::Index>(i - 1));
    pts[i](static_cast<Eigen::Index>(i - 1)) = base + 0.02 + 0.10 * std::abs(base);
    vals[i] = embed(pts[i]);
  }
  auto order = [&] {
    for (std::size_t i = 0; i + 1 <= n; ++i) {
      for (std::size_t j = i + 1; j <= n; ++j) {
        if (vals[j] < vals[i]) {
          std::swap(vals[i], vals[j]);
          std::swap(pts[i], pts[j]);
        }
      }
    }
  };
  order();
  for (long it = 0; it < maxIter; ++it) {
    if (vals[n] - vals[0] < tol * (std::abs(vals[0]) + tol)) break;
    Vector centroid = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) centroid += pts[i];
    centroid /= static_cast<double>(n);
    const Vector reflected = centroid + (centroid - pts[n]);
    const double fr = embed(reflected);
    if (fr < vals[0]) {
      const Vector expanded = centroid + 2.0 * (centroid - pts[n]);
      const double fe = embed(expanded);
      if (fe < fr) {
        pts[n] = expanded;
        vals[n] = fe;
      } else {
        pts[n] = reflected;
        vals[n] = fr;
      }
    } else if (fr < vals[n - 1]) {
      pts[n] = reflected;
      vals[n] = fr;
    } else {
      const Vector contracted = centroid + 0.5 * (pts[n] - centroid);
      const double fc = embed(contracted);
      if (fc < vals[n]) {
        pts[n] = contracted;
        vals[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          vals[i] = embed(pts[i]);
        }
      }
    }
    order();
  }
  for (std::size_t i = 0; i < n; ++i) x(idx[i]) = pts[0](static_cast<Eigen::Index>(i));
  return vals[0];
}

std::vector<std::vector<Eigen::Index>> search_blocks(Eigen::Index d,
                                                     Eigen::Index m) {
  std::vector<std::vector<Eigen::Index>> blocks(4);
  for (Eigen::Index i = 0; i < d; ++i) blocks[0].push_back(i);
  for (Eigen::Index i = 0; i < d * d; ++i) blocks[1].push_back(d + i);
  for (Eigen::Index i = 0; i < d * d; ++i) blocks[2].push_back(d + d * d + i);
  for (Eigen::Index i = 0; i < chol_len(d); ++i) blocks[3].push_back(m + i);
  return blocks;
}

double block_cycle(const std::function<double(const Vector&)>& f, Vector& x,
                   const std::vector<std::vector<Eigen::Index>>& blocks,
                   double tol, long maxCycles) {
  double best = f(x);
  for (long cycle = 0; cycle < maxCycles; ++cycle) {
    const double prev = best;
    for (const auto& block : blocks) {
      best = nelder_mead_block(f, x, block,  tol,
                               200 * static_cast<long>(block.size()));
    }
    if (prev - best < tol * (1.0 + std::abs(best))) break;
  }
  return best;
}

Matrix fd_hessian(const std::function<double(const Vector&)>& f,
                  const Vector& x) {
  const Eigen::Index n = x.size();
  const double f0 = f(x);
  Vector h(n);
  for (Eigen::Index i = 0; i < n; ++i) h(i) = 1e-4 * (1.0 + std::abs(x(i)));
  Matrix H(n, n);
  Vector p = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    p(i) = x(i) + h(i);
    const double fp = f(p);
    p(i) = x(i) - h(i);
    const double fm = f(p);
    p(i) = x(i);
    H(i, i) = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      p(i) = x(i) + h(i);
      p(j) = x(j) + h(j);
      const double fpp = f(p);
      p(j) = x(j) - h(j);
      const double fpm = f(p);
      p(i) = x(i) - h(i);
      const double fmm = f(p);
      p(j) = x(j) + h(j);
      const double fmp = f(p);
      p(i) = x(i);
      p(j) = x(j);
      H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h(i) * h(j));
    }
  }
  return 0.5 * (H + H.transpose());
}

// Inverse of the Hessian with an escalating ridge when the factorization
// rejects it (the mode of a rough objective need not be numerically PD).
Matrix robust_inverse(Matrix H) {
  const Eigen::Index n = H.rows();
  double ridge = 0.0;
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::LLT<Matrix> llt(H + ridge * Matrix::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      return llt.solve(Matrix::Identity(n, n));
    }
    ridge = ridge == 0.0 ? 1e-10 * scale : ridge * 10.0;
  }
  throw linalg_error("curvature matrix could not be inverted");
}

LN1Config with_default_prior(const LN1Config& config, Eigen::Index d) {
  LN1Config out = config;
  if (out.prior.scaleMatrix.size() == 0) out.prior = default_nw_hyper(d);
  return out;
}

}  // namespace

double ln1_loglik(const MeanParams& params, const Matrix& sigma,
                  const SeriesMatrix& series, const Vector& mu1) {
  MixtureComponent comp;
  comp.location = -0.5 * sigma.diagonal();
  comp.scale = sigma;
  return mixture_loglik(params, {1.0}, {comp}, series, mu1);
}

double ln1_logposterior(const MeanParams& params, const Matrix& sigma,
                        const SeriesMatrix& series, const Vector& mu1,
                        const LN1Config& config) {
  const LN1Config cfg = with_default_prior(config, params.dim());
  const double loglik = ln1_loglik(params, sigma, series, mu1);
  if (loglik == kNegInf) return kNegInf;
  const Vector eta = to_eta(params);
  const double etaPrior =
      -0.5 * eta.squaredNorm() / cfg.etaPriorVariance;
  const Eigen::LLT<Matrix> llt = cholesky_pd(sigma);
  const Matrix identity = Matrix::Identity(sigma.rows(), sigma.cols());
  const Matrix precision = llt.solve(identity);
  const double precPrior =
      wishart_logdensity(precision, cfg.prior.degrees, cfg.prior.scaleMatrix);
  return loglik + etaPrior + precPrior;
}

LN1Fit ln1_map(const SeriesMatrix& series, const LN1Config& config,
               const Vector& mu1Override) {
  validate(series);
  const Eigen::Index d = series.dim();
  const Eigen::Index m = d + 2 * d * d;
  const LN1Config cfg = with_default_prior(config, d);
  require(cfg.multistarts >= 1, "need at least one start");
  const Vector mu1 = mu1Override.size() == 0 ? sample_mean(series) : mu1Override;
  require(mu1.size() == d, "mu1 dimension mismatch");

  const Objective objective{series, mu1, cfg, d, m};
  auto f = [&](const Vector& theta) { return objective(theta); };

  // Moment-matched start: fixed point at the sample mean with mild
  // persistence split between B and A.
  const Vector xbar = sample_mean(series);
  MeanParams start;
  start.omega = 0.3 * xbar;
  start.B = 0.4 * Matrix::Identity(d, d);
  start.A = 0.3 * Matrix::Identity(d, d);
  Matrix sigma0;
  {
    const Residuals res = residuals(start, series, mu1);
    const Matrix centered =
        res.logEps.rowwise() - res.logEps.colwise().mean();
    sigma0 = centered.transpose() * centered /
                 static_cast<double>(series.length()) +
             1e-3 * Matrix::Identity(d, d);
  }

  Rng rng(cfg.seed);
  const auto blocks = search_blocks(d, m);
  Vector bestTheta;
  double bestVal = std::numeric_limits<double>::infinity();
  for (int s = 0; s < cfg.multistarts; ++s) {
    MeanParams p = start;
    Matrix sg = sigma0;
    if (s > 0) {
      for (Eigen::Index i = 0; i < d; ++i) {
        p.omega(i) *= std::exp(0.3 * rng.normal());
        p.B(i, i) = rng.uniform(0.2, 0.5);
        p.A(i, i) = rng.uniform(0.15, 0.45);
      }
      sg = sigma0 * rng.uniform(0.5, 1.5);
    }
    Vector theta = pack(p, sg);
    const double val = block_cycle(f, theta, blocks, cfg.tolerance,
                                   cfg.maxCycles);
    if (val < bestVal) {
      bestVal = val;
      bestTheta = theta;
    }
  }
  require(bestVal < kBadObjective, "no start produced a finite posterior");

  LN1Fit fit;
  fit.eta = from_eta(bestTheta.head(m), d);
  const Matrix L = unpack_chol(bestTheta, d, m);
  fit.sigma = L * L.transpose();
  fit.mu1 = mu1;
  fit.logPosterior = -bestVal;
  const Matrix cov = robust_inverse(fd_hessian(f, bestTheta));
  fit.etaCovariance = cov.topLeftCorner(m, m);
  fit.stdErrors = Vector(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    fit.stdErrors(i) = std::sqrt(std::max(cov(i, i), 1e-16));
  }
  return fit;
}

double ln1_lps(const LN1Fit& fit, const SeriesMatrix& series) {
  const std::vector<EvalDraw> draws = {
      eval_draw_single(fit.eta, fit.sigma, series, fit.mu1)};
  return lps(draws, series);
}

double ln1_lpml(const LN1Fit& fit, const SeriesMatrix& series,
                const LN1Config& config, long draws, Rng& rng) {
  validate(series);
  require(draws >= 2, "need at least two draws");
  const Eigen::Index d = series.dim();
  const Eigen::Index m = d + 2 * d * d;
  const LN1Config cfg = with_default_prior(config, d);
  const Objective objective{series, fit.mu1, cfg, d, m};
  auto f = [&](const Vector& theta) { return objective(theta); };
  const Vector mode = pack(fit.eta, fit.sigma);
  const Matrix cov = robust_inverse(fd_hessian(f, mode));
  Matrix covL;
  {
    double ridge = 0.0;
    const double scale = std::max(1e-12, cov.cwiseAbs().maxCoeff());
    Eigen::LLT<Matrix> llt;
    for (int attempt = 0;; ++attempt) {
      llt.compute(cov + ridge * Matrix::Identity(cov.rows(), cov.cols()));
      if (llt.info() == Eigen::Success) break;
      if (attempt >= 12) throw linalg_error("draw covariance not PD");
      ridge = ridge == 0.0 ? 1e-12 * scale : ridge * 10.0;
    }
    covL = llt.matrixL();
  }
  std::vector<EvalDraw> evalDraws;
  evalDraws.reserve(static_cast<std::size_t>(draws));
  long attempts = 0;
  const long maxAttempts = 200 * draws;
  Vector z(mode.size());
  while (evalDraws.size() < static_cast<std::size_t>(draws)) {
    if (++attempts > maxAttempts) {
      throw std::runtime_error(
          "could not draw enough positive-mean parameter samples");
    }
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    const Vector theta = mode + covL * z;
    const MeanParams params = from_eta(theta.head(m), d);
    const Matrix L = unpack_chol(theta, d, m);
    const Matrix sigma = L * L.transpose();
    const MeanRecursion rec = mean_recursion(params, series, fit.mu1);
    if (!rec.allPositive()) continue;
    EvalDraw ev;
    ev.weights = {1.0};
    MixtureComponent comp;
    comp.location = -0.5 * sigma.diagonal();
    comp.scale = sigma;
    ev.components = {comp};
    ev.means = rec.means;
    evalDraws.push_back(std::move(ev));
  }
  return lpml(evalDraws, series);
}

}  // namespace bvmem
