// Apache License, Version 2.0, refer to LICENSE.txt
#include "bvmem/vmem.hpp"

#include <cmath>
#include <limits>

namespace bvmem {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Vector to_eta(const MeanParams& params) {
  const auto d = params.dim();
  Vector eta(d + 2 * d * d);
  eta.head(d) = params.omega;
  eta.segment(d, d * d) = Eigen::Map<const Vector>(params.B.data(), d * d);
  eta.tail(d * d) = Eigen::Map<const Vector>(params.A.data(), d * d);
  return eta;
}

MeanParams from_eta(const Vector& eta, Eigen::Index d) {
  require(eta.size() == d + 2 * d * d, "from_eta: length must be d + 2d^2");
  MeanParams params;
  params.omega = eta.head(d);
  params.B = Eigen::Map<const Matrix>(eta.data() + d, d, d);
  params.A = Eigen::Map<const Matrix>(eta.data() + d + d * d, d, d);
  return params;
}

std::vector<std::string> eta_names(Eigen::Index d) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < d; ++i)
    names.push_back("omega[" + std::to_string(i + 1) + "]");
  for (const char* block : {"B", "A"})
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index i = 0; i < d; ++i)
        names.push_back(std::string(block) + "[" + std::to_string(i + 1) +
                        "," + std::to_string(j + 1) + "]");
  return names;
}

void validate(const SeriesMatrix& series) {
  require(series.length() >= 2, "series: need at least two observations");
  if ((series.values.array() <= 0.0).any()) {
    throw std::domain_error("series: entries must be strictly positive");
  }
  require(series.timestamps.empty() ||
              std::ssize(series.timestamps) == series.length(),
          "series: timestamp count must match row count");
}

void validate(const InnovationSpec& innov) {
  require(!innov.components.empty(), "innovation: no components");
  require(innov.weights.size() == innov.components.size(),
          "innovation: weights/components size mismatch");
  double total = 0.0;
  for (double w : innov.weights) {
    require(w >= 0.0, "innovation: negative weight");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-12,
          "innovation: weights must sum to one");
}

Vector innovation_mean(const InnovationSpec& innov) {
  validate(innov);
  const auto d = innov.components.front().dim();
  Vector mean = Vector::Zero(d);
  for (std::size_t j = 0; j < innov.components.size(); ++j) {
    const auto& c = innov.components[j];
    mean += innov.weights[j] *
            (c.location + 0.5 * c.scale.diagonal()).array().exp().matrix();
  }
  return mean;
}

MeanRecursion mean_recursion(const MeanParams& params,
                             const SeriesMatrix& series, const Vector& mu1) {
  const auto d = series.dim();
  const auto T = series.length();
  require(params.dim() == d && params.B.rows() == d && params.B.cols() == d &&
              params.A.rows() == d && params.A.cols() == d,
          "mean_recursion: parameter/series dimension mismatch");
  require(mu1.size() == d, "mean_recursion: mu1 dimension mismatch");

  MeanRecursion out;
  out.means.resize(T, d);
  out.means.row(0) = mu1.transpose();
  Vector prev = mu1;
  for (Eigen::Index t = 1; t < T; ++t) {
    prev = params.omega + params.B * prev +
           params.A * series.values.row(t - 1).transpose();
    out.means.row(t) = prev.transpose();
  }
  for (Eigen::Index t = 0; t < T && out.firstNonPositive < 0; ++t) {
    if ((out.means.row(t).array() <= 0.0).any()) out.firstNonPositive = t;
  }
  return out;
}

double stationarity_margin(const MeanParams& params) {
  const Matrix sum = params.B + params.A;
  const Eigen::EigenSolver<Matrix> solver(sum, /*computeEigenvectors=*/false);
  return 1.0 - solver.eigenvalues().cwiseAbs().maxCoeff();
}

Vector fixed_point(const MeanParams& params, const Vector& epsMean) {
  const auto d = params.dim();
  const Matrix lhs = Matrix::Identity(d, d) - params.B - params.A;
  return lhs.partialPivLu()
      .solve((params.omega.array() * epsMean.array()).matrix())
      .eval();
}

SimulationResult simulate(const MeanParams& params, const InnovationSpec& innov,
                          Eigen::Index T, const Vector& mu1, Rng& rng) {
  validate(innov);
  const auto d = params.dim();
  require(T >= 2, "simulate: need T >= 2");
  require(mu1.size() == d && (mu1.array() > 0.0).all(),
          "simulate: mu1 must be positive with matching dimension");

  SimulationResult out;
  out.series.values.resize(T, d);
  out.innovations.resize(T, d);
  out.means.resize(T, d);

  Vector mu = mu1;
  for (Eigen::Index t = 0; t < T; ++t) {
    if (t > 0) {
      mu = params.omega + params.B * mu +
           params.A * out.series.values.row(t - 1).transpose();
    }
    if ((mu.array() <= 0.0).any()) {
      throw std::domain_error(
          "simulate: non-positive conditional mean at t = " +
          std::to_string(t));
    }
    // Component pick by cumulative weight, then one kernel draw.
    const double u = rng.uniform();
    std::size_t pick = innov.components.size() - 1;
    double cum = 0.0;
    for (std::size_t j = 0; j < innov.weights.size(); ++j) {
      cum += innov.weights[j];
      if (u <= cum) {
        pick = j;
        break;
      }
    }
    const Vector eps = logn_sample(innov.components[pick], rng);
    out.means.row(t) = mu.transpose();
    out.innovations.row(t) = eps.transpose();
    out.series.values.row(t) = (mu.array() * eps.array()).transpose();
  }
  return out;
}

Residuals residuals(const MeanParams& params, const SeriesMatrix& series,
                    const Vector& mu1) {
  const auto rec = mean_recursion(params, series, mu1);
  if (!rec.allPositive()) {
    throw std::domain_error("residuals: non-positive conditional mean at t = " +
                            std::to_string(rec.firstNonPositive));
  }
  Residuals out;
  out.eps = series.values.array() / rec.means.array();
  out.logEps = out.eps.array().log();
  return out;
}

double mixture_loglik(const MeanParams& params,
                      const std::vector<double>& weights,
                      const std::vector<MixtureComponent>& comps,
                      const SeriesMatrix& series, const Vector& mu1) {
  require(weights.size() == comps.size() && !comps.empty(),
          "mixture_loglik: weights/components mismatch");
  const auto rec = mean_recursion(params, series, mu1);
  if (!rec.allPositive()) return kNegInf;

  const auto K = comps.size();
  std::vector<Eigen::LLT<Matrix>> factors;
  std::vector<double> logdets(K);
  std::vector<double> logws(K);
  factors.reserve(K);
  for (std::size_t j = 0; j < K; ++j) {
    factors.push_back(cholesky_pd(comps[j].scale));
    logdets[j] = cholesky_logdet(factors[j]);
    logws[j] = weights[j] > 0.0 ? std::log(weights[j]) : kNegInf;
  }

  const Matrix logx = series.values.array().log();
  double total = -logx.sum();
  std::vector<double> terms(K);
  for (Eigen::Index t = 0; t < series.length(); ++t) {
    const Vector y = logx.row(t).transpose() -
                     rec.means.row(t).transpose().array().log().matrix();
    for (std::size_t j = 0; j < K; ++j) {
      terms[j] =
          logws[j] + mvn_logdensity(y, comps[j].location, factors[j],
                                    logdets[j]);
    }
    total += logsumexp(terms);
  }
  return total;
}

Vector sample_mean(const SeriesMatrix& series) {
  return series.values.colwise().mean().transpose();
}

}  // namespace bvmem
