// Apache License, Version 2.0, refer to LICENSE.txt
#include "bvmem/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace bvmem {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogTwoPi = 1.8378770664093454836;

// Kahan-compensated accumulator, used where the contract promises
// permutation stability of sums.
struct Kahan {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

double lgamma_multivariate(double a, int d) {
  double out = 0.25 * d * (d - 1) * std::log(std::numbers::pi);
  for (int i = 1; i <= d; ++i) out += std::lgamma(a + 0.5 * (1 - i));
  return out;
}

}  // namespace

void StickState::rebuild_weights() {
  weights = stick_break(sticks, sticks.size());
}

Eigen::LLT<Matrix> cholesky_pd(const Matrix& m) {
  require(m.rows() == m.cols(), "cholesky_pd: matrix must be square");
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success) {
    throw linalg_error("cholesky_pd: matrix is not positive definite");
  }
  return llt;
}

double cholesky_logdet(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double mvn_logdensity(const Vector& y, const Vector& mean,
                      const Eigen::LLT<Matrix>& chol, double logdet) {
  const auto d = y.size();
  Vector z = y - mean;
  chol.matrixL().solveInPlace(z);
  return -0.5 * (d * kLogTwoPi + logdet + z.squaredNorm());
}

double logn_logdensity(const Vector& x, const MixtureComponent& comp) {
  require(x.size() == comp.dim(), "logn_logdensity: dimension mismatch");
  if ((x.array() <= 0.0).any()) {
    throw std::domain_error("logn_logdensity: x must be strictly positive");
  }
  const auto llt = cholesky_pd(comp.scale);
  const Vector logx = x.array().log();
  return mvn_logdensity(logx, comp.location, llt, cholesky_logdet(llt)) -
         logx.sum();
}

double logn_density(const Vector& x, const MixtureComponent& comp) {
  return std::exp(logn_logdensity(x, comp));
}

Vector logn_sample(const MixtureComponent& comp, Rng& rng) {
  const auto llt = cholesky_pd(comp.scale);
  Vector z(comp.dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  const Vector y = comp.location + llt.matrixL() * z;
  return y.array().exp();
}

std::vector<double> stick_break(const std::vector<double>& sticks,
                                std::size_t count) {
  require(count <= sticks.size(), "stick_break: count exceeds stick list");
  std::vector<double> weights(count);
  double remaining = 1.0;
  for (std::size_t j = 0; j < count; ++j) {
    const double v = sticks[j];
    if (!(v > 0.0 && v < 1.0)) {
      throw std::domain_error("stick_break: sticks must lie in (0,1)");
    }
    weights[j] = v * remaining;
    remaining *= 1.0 - v;
  }
  return weights;
}

Matrix wishart_sample(double degrees, const Matrix& scale, Rng& rng) {
  const auto d = scale.rows();
  require(degrees >= static_cast<double>(d),
          "wishart_sample: degrees must be >= dimension");
  const auto llt = cholesky_pd(scale);
  // Bartlett: A lower triangular with chi draws on the diagonal and
  // standard normals below; the sample is (L A)(L A)^T.
  Matrix a = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(degrees - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Matrix f = llt.matrixL() * a;
  return f * f.transpose();
}

MixtureComponent normal_wishart_sample(const NWHyper& hyper, Rng& rng) {
  const Matrix precision =
      wishart_sample(hyper.degrees, hyper.scaleMatrix, rng);
  const auto pllt = cholesky_pd(precision);
  const auto d = hyper.dim();
  // m | P ~ N(nu, (n0 P)^-1): solve L^T m' = z against chol(P) = L L^T.
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.normal();
  pllt.matrixU().solveInPlace(z);
  MixtureComponent comp;
  comp.location =
      hyper.priorMean + z / std::sqrt(hyper.priorPrecisionScale);
  comp.scale = pllt.solve(Matrix::Identity(d, d));
  return comp;
}

NWHyper normal_wishart_posterior(const NWHyper& hyper,
                                 const std::vector<Vector>& data) {
  if (data.empty()) return hyper;
  const auto d = hyper.dim();
  const double n = static_cast<double>(data.size());

  Vector mean(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Kahan acc;
    for (const auto& y : data) acc.add(y(i));
    mean(i) = acc.sum / n;
  }

  Matrix scatter(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      Kahan acc;
      for (const auto& y : data) acc.add((y(i) - mean(i)) * (y(j) - mean(j)));
      scatter(i, j) = acc.sum;
      scatter(j, i) = acc.sum;
    }
  }

  const double n0 = hyper.priorPrecisionScale;
  const Vector shift = mean - hyper.priorMean;
  const Matrix inverseScale = cholesky_pd(hyper.scaleMatrix)
                                  .solve(Matrix::Identity(d, d)) +
                              scatter +
                              (n0 * n / (n + n0)) * shift * shift.transpose();

  NWHyper post;
  post.degrees = hyper.degrees + n;
  // PD by construction; the dense inverse rounds exactly representable
  // low-dimensional cases more tightly than a factor-and-solve.
  post.scaleMatrix = inverseScale.inverse();
  post.priorMean = (n0 * hyper.priorMean + n * mean) / (n0 + n);
  post.priorPrecisionScale = n0 + n;
  return post;
}

double wishart_logdensity(const Matrix& p, double degrees,
                          const Matrix& scale) {
  const int d = static_cast<int>(p.rows());
  const auto pllt = cholesky_pd(p);
  const auto sllt = cholesky_pd(scale);
  const double trace = sllt.solve(p).trace();
  return 0.5 * (degrees - d - 1) * cholesky_logdet(pllt) - 0.5 * trace -
         0.5 * degrees * d * std::numbers::ln2 -
         0.5 * degrees * cholesky_logdet(sllt) -
         lgamma_multivariate(0.5 * degrees, d);
}

double logsumexp(const double* begin, const double* end) {
  double best = kNegInf;
  for (const double* it = begin; it != end; ++it) best = std::max(best, *it);
  if (best == kNegInf) return kNegInf;
  double sum = 0.0;
  for (const double* it = begin; it != end; ++it) sum += std::exp(*it - best);
  return best + std::log(sum);
}

double logsumexp(const std::vector<double>& values) {
  return logsumexp(values.data(), values.data() + values.size());
}

}  // namespace bvmem
