// Apache License, Version 2.0, refer to LICENSE.txt
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "bvmem/presets.hpp"
#include "bvmem/sampler.hpp"
#include "testutil.hpp"

using namespace bvmem;
using testutil::Moments;

namespace {

MixtureComponent comp1d(double location, double variance) {
  MixtureComponent c;
  c.location = Vector::Constant(1, location);
  c.scale = Matrix::Constant(1, 1, variance);
  return c;
}

// Minimal consistent chain state: K sticks and components, labels given.
ChainState make_state(std::vector<double> sticks,
                      std::vector<MixtureComponent> comps,
                      std::vector<int> labels, double alpha = 1.0) {
  ChainState st;
  st.sticks.sticks = std::move(sticks);
  st.sticks.concentration = alpha;
  st.sticks.rebuild_weights();
  st.components = std::move(comps);
  st.labels = std::move(labels);
  st.slices.assign(st.labels.size(), 0.1);
  return st;
}

NWHyper hyper1d(double degrees, double w, double mean, double n0) {
  NWHyper h;
  h.degrees = degrees;
  h.scaleMatrix = Matrix::Constant(1, 1, w);
  h.priorMean = Vector::Constant(1, mean);
  h.priorPrecisionScale = n0;
  return h;
}

}  // namespace

TEST_CASE("default hyperparameters") {
  const NWHyper h = default_nw_hyper(3);
  CHECK(h.degrees == 13.0);
  CHECK((h.scaleMatrix - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(h.priorMean.cwiseAbs().maxCoeff() == 0.0);
  CHECK(h.priorPrecisionScale == 1.0);
}

TEST_CASE("xi decay sequence closed form") {
  CHECK(xi(1, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(xi(2, 1.0) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(xi(3, 1.0) == doctest::Approx(1.0 / 27.0).epsilon(1e-15));
  CHECK(xi(1, 2.0) == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
  CHECK_THROWS_AS((void)xi(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)xi(1, 0.0), std::invalid_argument);
}

TEST_CASE("slice step draws uniformly under the label's xi") {
  ChainState st = make_state({0.5, 0.5},
                             {comp1d(0.0, 1.0), comp1d(0.0, 1.0)}, {1, 2});
  Rng rng(3);
  Moments u1, u2;
  for (int it = 0; it < 20000; ++it) {
    step_slices(st, rng);
    CHECK(st.slices[0] > 0.0);
    CHECK(st.slices[0] < xi(1, 1.0));
    CHECK(st.slices[1] < xi(2, 1.0));
    u1.add(st.slices[0]);
    u2.add(st.slices[1]);
  }
  CHECK(std::abs(u1.mean() - xi(1, 1.0) / 2.0) < 4.0 * u1.se());
  CHECK(std::abs(u2.mean() - xi(2, 1.0) / 2.0) < 4.0 * u2.se());
}

TEST_CASE("stick step draws Beta(1 + n_j, alpha + g_j)") {
  // Labels (1,1,2,3): n = (2,1,1), g = (2,1,0). With alpha = 1 the stick
  // means are 3/6, 2/4 and 2/3.
  Rng rng(5);
  Moments v1, v2, v3;
  for (int it = 0; it < 10000; ++it) {
    ChainState st = make_state(
        {0.5, 0.5, 0.5},
        {comp1d(0.0, 1.0), comp1d(0.0, 1.0), comp1d(0.0, 1.0)}, {1, 1, 2, 3});
    step_sticks(st, rng);
    v1.add(st.sticks.sticks[0]);
    v2.add(st.sticks.sticks[1]);
    v3.add(st.sticks.sticks[2]);
    CHECK(st.sticks.weights[0] == st.sticks.sticks[0]);
  }
  CHECK(std::abs(v1.mean() - 0.5) < 4.0 * v1.se());
  CHECK(std::abs(v2.mean() - 0.5) < 4.0 * v2.se());
  CHECK(std::abs(v3.mean() - 2.0 / 3.0) < 4.0 * v3.se());
}

TEST_CASE("stick step with every point in cluster one") {
  const long T = 50;
  Rng rng(7);
  Moments v1;
  for (int it = 0; it < 10000; ++it) {
    ChainState st = make_state({0.5}, {comp1d(0.0, 1.0)},
                               std::vector<int>(T, 1));
    step_sticks(st, rng);
    v1.add(st.sticks.sticks[0]);
  }
  const double expected = (1.0 + T) / (1.0 + T + 1.0);
  CHECK(std::abs(v1.mean() - expected) < 4.0 * v1.se());
}

TEST_CASE("component step matches the conjugate posterior in one dimension") {
  // Two observations at 1 and 2 under the unit-scale prior: posterior has
  // degrees 5, scale 1/3, mean 1, precision multiplier 3. So E[P] = 5/3
  // and E[m] = 1.
  Matrix logRes(2, 1);
  logRes << 1.0, 2.0;
  const NWHyper hyper = hyper1d(3.0, 1.0, 0.0, 1.0);
  Rng rng(9);
  Moments precision, location;
  for (int it = 0; it < 10000; ++it) {
    ChainState st = make_state({0.5}, {comp1d(0.0, 1.0)}, {1, 1});
    step_components(st, logRes, hyper, rng);
    precision.add(1.0 / st.components[0].scale(0, 0));
    location.add(st.components[0].location(0));
  }
  CHECK(std::abs(precision.mean() - 5.0 / 3.0) < 4.0 * precision.se());
  CHECK(std::abs(location.mean() - 1.0) < 4.0 * location.se());
}

TEST_CASE("component step redraws empty clusters from the prior") {
  Matrix logRes(2, 1);
  logRes << 0.4, 0.6;
  const NWHyper hyper = hyper1d(6.0, 1.0 / 6.0, -0.3, 1.0);
  Rng rng(11);
  Moments precision, location;
  for (int it = 0; it < 10000; ++it) {
    // Both points sit in cluster one; cluster two is empty.
    ChainState st = make_state({0.5, 0.5},
                               {comp1d(0.0, 1.0), comp1d(0.0, 1.0)}, {1, 1});
    step_components(st, logRes, hyper, rng);
    precision.add(1.0 / st.components[1].scale(0, 0));
    location.add(st.components[1].location(0));
  }
  // Prior moments: E[P] = degrees * W = 1, E[m] = -0.3.
  CHECK(std::abs(precision.mean() - 1.0) < 4.0 * precision.se());
  CHECK(std::abs(location.mean() + 0.3) < 4.0 * location.se());
}

TEST_CASE("component step concentrates on a large cluster") {
  const Eigen::Index n = 20000;
  Rng data(13);
  Matrix logRes(n, 1);
  Moments sample;
  for (Eigen::Index t = 0; t < n; ++t) {
    logRes(t, 0) = 0.3 + 0.5 * data.normal();
    sample.add(logRes(t, 0));
  }
  ChainState st = make_state({0.5}, {comp1d(0.0, 1.0)},
                             std::vector<int>(n, 1));
  const NWHyper hyper = hyper1d(3.0, 1.0, 0.0, 1.0);
  Rng rng(15);
  Moments location, variance;
  for (int it = 0; it < 200; ++it) {
    step_components(st, logRes, hyper, rng);
    location.add(st.components[0].location(0));
    variance.add(st.components[0].scale(0, 0));
  }
  CHECK(location.mean() == doctest::Approx(sample.mean()).epsilon(0.02));
  CHECK(variance.mean() == doctest::Approx(sample.var()).epsilon(0.05));
}

TEST_CASE("label step respects the slice support bound") {
  // u = 0.1 with alpha = 1: xi(2) = 1/9 > u but xi(3) = 1/27 < u, so no
  // label beyond 2 can be selected no matter what the kernels say.
  Rng rng(17);
  Matrix logRes(3, 1);
  logRes << -0.5, 0.0, 0.5;
  const NWHyper hyper = hyper1d(3.0, 1.0, 0.0, 1.0);
  for (int it = 0; it < 2000; ++it) {
    ChainState st = make_state(
        {0.3, 0.3, 0.3, 0.3},
        {comp1d(0.0, 1.0), comp1d(0.0, 1.0), comp1d(0.0, 1.0),
         comp1d(0.0, 1.0)},
        {1, 2, 3});
    st.slices = {0.1, 0.1, 0.1};
    step_labels(st, logRes, hyper, rng);
    for (const int l : st.labels) {
      CHECK(l >= 1);
      CHECK(l <= 2);
    }
  }
}

TEST_CASE("label step extends the lists lazily for deep slices") {
  Rng rng(19);
  Matrix logRes(1, 1);
  logRes << 0.0;
  ChainState st = make_state({0.5}, {comp1d(0.0, 1.0)}, {1});
  // xi(16) > 1e-8 > xi(17) for alpha = 1, so the candidate set must reach
  // at least index 16.
  st.slices = {1e-8};
  step_labels(st, logRes, hyper1d(3.0, 1.0, 0.0, 1.0), rng);
  CHECK(st.sticks.size() >= 16);
  CHECK(st.components.size() == st.sticks.size());
  CHECK(st.sticks.weights.size() == st.sticks.size());
}

TEST_CASE("label step throws when a slice exceeds every candidate xi") {
  Rng rng(21);
  Matrix logRes(1, 1);
  logRes << 0.0;
  ChainState st = make_state({0.5}, {comp1d(0.0, 1.0)}, {1});
  st.slices = {0.9};
  CHECK_THROWS_AS(step_labels(st, logRes, hyper1d(3.0, 1.0, 0.0, 1.0), rng),
                  std::logic_error);
}

TEST_CASE("label step picks the overwhelmingly better kernel") {
  Rng rng(23);
  Matrix logRes(2, 1);
  logRes << -5.0, 5.0;
  const NWHyper hyper = hyper1d(3.0, 1.0, 0.0, 1.0);
  long hits = 0;
  const int reps = 2000;
  for (int it = 0; it < reps; ++it) {
    ChainState st = make_state({0.5, 1.0 - 1e-12},
                               {comp1d(-5.0, 0.01), comp1d(5.0, 0.01)},
                               {1, 1});
    st.slices = {0.05, 0.05};
    step_labels(st, logRes, hyper, rng);
    if (st.labels[0] == 1 && st.labels[1] == 2) ++hits;
  }
  CHECK(static_cast<double>(hits) / reps > 0.99);
}

TEST_CASE("slice and label steps jointly preserve the mixture marginal") {
  // One observation exactly between two symmetric kernels of equal weight:
  // the marginal label law is 50/50, and the slice variables must not
  // distort it.
  Rng rng(25);
  Matrix logRes(1, 1);
  logRes << 0.0;
  const NWHyper hyper = hyper1d(3.0, 1.0, 0.0, 1.0);
  ChainState st = make_state({0.5, 1.0 - 1e-12},
                             {comp1d(-2.0, 1.0), comp1d(2.0, 1.0)}, {1});
  st.slices = {0.1};
  long ones = 0;
  const int sweeps = 40000;
  for (int it = 0; it < sweeps; ++it) {
    step_slices(st, rng);
    step_labels(st, logRes, hyper, rng);
    if (st.labels[0] == 1) ++ones;
  }
  const double p = static_cast<double>(ones) / sweeps;
  CHECK(std::abs(p - 0.5) < 0.02);
}

TEST_CASE("metropolis acceptance rate matches exp(logRatio)") {
  Rng rng(27);
  long accepted = 0;
  const int reps = 100000;
  for (int it = 0; it < reps; ++it) {
    if (metropolis_accept(-0.5, rng)) ++accepted;
  }
  const double rate = static_cast<double>(accepted) / reps;
  const double expected = std::exp(-0.5);
  const double se = std::sqrt(expected * (1.0 - expected) / reps);
  CHECK(std::abs(rate - expected) < 4.0 * se);
  CHECK(metropolis_accept(0.0, rng));
  CHECK(metropolis_accept(50.0, rng));
}

TEST_CASE("metropolis rule leaves a two-state target invariant") {
  const double logpi[2] = {std::log(0.25), std::log(0.75)};
  Rng rng(29);
  int stateIdx = 0;
  long visits0 = 0;
  const int steps = 200000;
  for (int it = 0; it < steps; ++it) {
    const int other = 1 - stateIdx;
    if (metropolis_accept(logpi[other] - logpi[stateIdx], rng)) {
      stateIdx = other;
    }
    if (stateIdx == 0) ++visits0;
  }
  CHECK(std::abs(static_cast<double>(visits0) / steps - 0.25) < 0.01);
}

TEST_CASE("adaptation statistics reproduce the sample covariance") {
  Rng rng(31);
  AdaptState adapt;
  const int n = 500;
  Matrix draws(n, 3);
  for (int i = 0; i < n; ++i) {
    Vector eta(3);
    for (int j = 0; j < 3; ++j) eta(j) = rng.normal() * (j + 1.0);
    draws.row(i) = eta.transpose();
    update_adaptation(adapt, eta);
  }
  CHECK(adapt.count == n);
  const Vector mean = draws.colwise().mean().transpose();
  CHECK((adapt.runningMean - mean).cwiseAbs().maxCoeff() < 1e-10);
  const Matrix centered = draws.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / (n - 1.0);
  const Matrix fromScatter = adapt.runningScatter / (n - 1.0);
  CHECK((fromScatter - cov).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("proposal covariance floors and structure") {
  AdaptState adapt;
  const Vector mbar = Vector::Constant(1, 2.0);
  const Matrix early = proposal_cov(adapt, mbar, 1);
  CHECK((early - 1e-6 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);

  // Constant draws give zero scatter, so only the ridge remains.
  update_adaptation(adapt, Vector::Constant(3, 1.5));
  CHECK((proposal_cov(adapt, mbar, 1) - 1e-6 * Matrix::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  update_adaptation(adapt, Vector::Constant(3, 1.5));
  const Matrix constant = proposal_cov(adapt, mbar, 1);
  CHECK((constant - 1e-6 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <
        1e-18);
}

TEST_CASE("proposal covariance rescales by the identification vector") {
  // d = 1: eta = (omega, b, a) and c = (mbar, 1, mbar). Independent draws
  // with variances (4, 9, 16) and mbar = 2 give Lambda diag (1, 9, 4).
  Rng rng(33);
  AdaptState adapt;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    Vector eta(3);
    eta << 2.0 * rng.normal(), 3.0 * rng.normal(), 4.0 * rng.normal();
    update_adaptation(adapt, eta);
  }
  const Matrix lambda = proposal_cov(adapt, Vector::Constant(1, 2.0), 1);
  CHECK(lambda(0, 0) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(lambda(1, 1) == doctest::Approx(9.0).epsilon(0.05));
  CHECK(lambda(2, 2) == doctest::Approx(4.0).epsilon(0.05));
  // Independent coordinates: off-diagonal entries stay near the ridge.
  CHECK(std::abs(lambda(0, 1)) < 0.05);
}

TEST_CASE("adaptation updates diminish as the chain grows") {
  // One bounded extra draw moves the covariance estimate by O(1/n).
  auto covNorm = [](const AdaptState& a) {
    return Matrix(a.runningScatter / (a.count - 1.0)).cwiseAbs().maxCoeff();
  };
  double jumpSmall = 0.0, jumpLarge = 0.0;
  AdaptState acc;
  Rng stream(37);
  for (int i = 0; i < 200; ++i) {
    Vector eta(2);
    eta << stream.normal(), stream.normal();
    update_adaptation(acc, eta);
  }
  {
    AdaptState bumped = acc;
    update_adaptation(bumped, Vector::Constant(2, 3.0));
    jumpSmall = std::abs(covNorm(bumped) - covNorm(acc));
  }
  for (int i = 0; i < 19800; ++i) {
    Vector eta(2);
    eta << stream.normal(), stream.normal();
    update_adaptation(acc, eta);
  }
  {
    AdaptState bumped = acc;
    update_adaptation(bumped, Vector::Constant(2, 3.0));
    jumpLarge = std::abs(covNorm(bumped) - covNorm(acc));
  }
  CHECK(jumpLarge < jumpSmall / 10.0);
}

TEST_CASE("eta step with a frozen proposal leaves eta bit-identical") {
  const MeanParams p = example_mean_params();
  const InnovationSpec innov = example_innovation();
  Rng simRng(39);
  const Vector mu1 = Vector::Constant(3, 5.0);
  const SimulationResult sim = simulate(p, innov, 50, mu1, simRng);
  const Matrix logSeries = sim.series.values.array().log();
  const MeanRecursion rec = mean_recursion(p, sim.series, mu1);
  const Matrix logResiduals = logSeries - rec.means.array().log().matrix();

  ChainState st = make_state(
      {0.6, 1.0 - 1e-12},
      {innov.components[0], innov.components[1]},
      std::vector<int>(50, 1));
  st.eta = p;
  st.adapt.mixtureWeight = 0.9;
  st.adapt.sigma1 = 0.0;
  st.adapt.sigma2 = 0.0;

  SamplerConfig config;
  config.etaPriorVariance = 20.0;
  Rng rng(41);
  const Vector before = to_eta(st.eta);
  long accepted = 0;
  for (int it = 0; it < 50; ++it) {
    if (step_eta(st, sim.series, logSeries, logResiduals, mu1, config,
                 Vector::Ones(3), rng)) {
      ++accepted;
    }
  }
  const Vector after = to_eta(st.eta);
  for (Eigen::Index i = 0; i < before.size(); ++i) {
    CHECK(after(i) == before(i));
  }
  CHECK(accepted >= 49);
}

TEST_CASE("eta step accepts almost every microscopic move") {
  const MeanParams p = example_mean_params();
  const InnovationSpec innov = example_innovation();
  Rng simRng(43);
  const Vector mu1 = Vector::Constant(3, 5.0);
  const SimulationResult sim = simulate(p, innov, 80, mu1, simRng);
  const Matrix logSeries = sim.series.values.array().log();

  ChainState st = make_state(
      {0.6, 1.0 - 1e-12},
      {innov.components[0], innov.components[1]},
      std::vector<int>(80, 1));
  st.eta = p;
  st.adapt.sigma1 = 1e-6;
  st.adapt.sigma2 = 1e-6;

  SamplerConfig config;
  Rng rng(45);
  long accepted = 0;
  const int reps = 1000;
  for (int it = 0; it < reps; ++it) {
    const MeanRecursion rec = mean_recursion(st.eta, sim.series, mu1);
    const Matrix logResiduals = logSeries - rec.means.array().log().matrix();
    if (step_eta(st, sim.series, logSeries, logResiduals, mu1, config,
                 Vector::Ones(3), rng)) {
      ++accepted;
    }
  }
  CHECK(static_cast<double>(accepted) / reps > 0.95);
}

TEST_CASE("prior is a fixed point of the sweep with no data") {
  // With an empty panel every stick is Beta(1, alpha) and every component
  // is a fresh prior draw, so long-run moments must match the prior.
  const NWHyper hyper = hyper1d(3.0, 0.5, 0.2, 1.0);
  Rng rng(47);
  Moments stick, location, precision;
  ChainState st = make_state({0.5}, {comp1d(0.0, 1.0)}, {});
  for (int it = 0; it < 20000; ++it) {
    step_slices(st, rng);
    step_sticks(st, rng);
    step_components(st, Matrix(0, 1), hyper, rng);
    step_labels(st, Matrix(0, 1), hyper, rng);
    stick.add(st.sticks.sticks[0]);
    location.add(st.components[0].location(0));
    precision.add(1.0 / st.components[0].scale(0, 0));
  }
  CHECK(std::abs(stick.mean() - 0.5) < 4.0 * stick.se());
  CHECK(std::abs(location.mean() - 0.2) < 4.0 * location.se());
  CHECK(std::abs(precision.mean() - 1.5) < 4.0 * precision.se());
}

TEST_CASE("run is deterministic for a fixed seed") {
  const MeanParams p = example_mean_params();
  const InnovationSpec innov = example_innovation();
  Rng simRng(49);
  const SimulationResult sim =
      simulate(p, innov, 60, Vector::Constant(3, 5.0), simRng);

  SamplerConfig config;
  config.iterations = 120;
  config.burnIn = 40;
  config.thin = 4;
  config.seed = 1234;

  auto collect = [&](std::vector<double>& sink) {
    return [&sink](const ChainState& snap) {
      const Vector eta = to_eta(snap.eta);
      sink.insert(sink.end(), eta.data(), eta.data() + eta.size());
      sink.insert(sink.end(), snap.sticks.sticks.begin(),
                  snap.sticks.sticks.end());
      for (const auto& c : snap.components) {
        sink.insert(sink.end(), c.location.data(),
                    c.location.data() + c.location.size());
      }
      sink.push_back(static_cast<double>(snap.iteration));
    };
  };

  std::vector<double> first, second;
  const RunDiagnostics d1 = run(config, sim.series, p, collect(first));
  const RunDiagnostics d2 = run(config, sim.series, p, collect(second));
  REQUIRE(first.size() == second.size());
  REQUIRE(!first.empty());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i] == second[i]);
  }
  CHECK(d1.acceptedEta == d2.acceptedEta);
  CHECK(d1.maxComponents == d2.maxComponents);

  SamplerConfig other = config;
  other.seed = 1235;
  std::vector<double> third;
  (void)run(other, sim.series, p, collect(third));
  bool anyDifferent = third.size() != first.size();
  for (std::size_t i = 0; !anyDifferent && i < first.size(); ++i) {
    anyDifferent = first[i] != third[i];
  }
  CHECK(anyDifferent);
}

TEST_CASE("run emits snapshots whose lists cover the truncation level") {
  const MeanParams p = example_mean_params();
  const InnovationSpec innov = example_innovation();
  Rng simRng(51);
  const SimulationResult sim =
      simulate(p, innov, 60, Vector::Constant(3, 5.0), simRng);

  SamplerConfig config;
  config.iterations = 60;
  config.burnIn = 20;
  config.thin = 2;
  config.seed = 7;

  int emitted = 0;
  const RunDiagnostics diag =
      run(config, sim.series, p, [&](const ChainState& snap) {
        ++emitted;
        const IdentifiedDraw dr = identify(snap, config.epsMeanTrunc);
        CHECK(dr.truncation.residualMass < config.epsMeanTrunc);
        CHECK(dr.components.size() == dr.truncation.K);
        const Vector mean =
            mixture_mean(dr.weights, dr.components, dr.weights.size());
        CHECK((mean - Vector::Ones(3)).cwiseAbs().maxCoeff() < 1e-9);
      });
  CHECK(emitted == 20);
  CHECK(diag.etaProposals == 60);
  CHECK(static_cast<int>(diag.maxComponents.size()) == 60);
  CHECK(diag.mu1.size() == 3);
}

TEST_CASE("run collapses to the conjugate model when alpha is negligible") {
  // alpha = 1e-8 keeps every label in cluster one, and near-zero proposal
  // scales freeze eta, so emitted components are draws from the fixed
  // Normal-Wishart posterior of the log-residuals.
  const MeanParams p = example_mean_params();
  const InnovationSpec innov = example_innovation();
  Rng simRng(53);
  const Vector mu1 = Vector::Constant(3, 5.0);
  const SimulationResult sim = simulate(p, innov, 40, mu1, simRng);

  SamplerConfig config;
  config.iterations = 3000;
  config.burnIn = 200;
  config.thin = 1;
  config.alpha = 1e-8;
  config.proposalScale1 = 1e-12;
  config.proposalScale2 = 1e-12;
  config.seed = 99;

  const Residuals res = residuals(p, sim.series, mu1);
  std::vector<Vector> data;
  for (Eigen::Index t = 0; t < res.logEps.rows(); ++t) {
    data.push_back(res.logEps.row(t).transpose());
  }
  const NWHyper post =
      normal_wishart_posterior(default_nw_hyper(3), data);

  Moments loc0, prec00;
  const RunDiagnostics diag =
      run(config, sim.series, p, [&](const ChainState& snap) {
        CHECK(snap.labels == std::vector<int>(40, 1));
        loc0.add(snap.components[0].location(0));
        prec00.add(cholesky_pd(snap.components[0].scale)
                       .solve(Matrix::Identity(3, 3))(0, 0));
      }, mu1);
  (void)diag;
  CHECK(std::abs(loc0.mean() - post.priorMean(0)) < 4.0 * loc0.se());
  const double expectedPrec = post.degrees * post.scaleMatrix(0, 0);
  CHECK(std::abs(prec00.mean() - expectedPrec) < 4.0 * prec00.se());
}
