#include <gtest/gtest.h>

#include "gmhmm/density.hpp"
#include "gmhmm/model_io.hpp"
#include "gmhmm/sim.hpp"
#include "oracle.hpp"

namespace gmhmm {
namespace {

GmHmm sp500_model() { return load_model(oracle::data_path("sp500_calibrated_model.json")); }

TEST(CounterRng, ReproducibleAndStreamSeparated) {
  CounterRng a(1, 0), b(1, 0), c(1, 1), d(2, 0);
  for (int i = 0; i < 5; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    EXPECT_NE(x, d.next_u64());
  }
}

TEST(CounterRng, UniformAndNormalMoments) {
  CounterRng r(7, 3);
  const int N = 200000;
  double su = 0.0, sz = 0.0, sz2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
  }
  for (int i = 0; i < N; ++i) {
    const double z = r.normal();
    sz += z;
    sz2 += z * z;
  }
  EXPECT_NEAR(su / N, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / N));
  EXPECT_NEAR(sz / N, 0.0, 3.0 / std::sqrt(N));
  EXPECT_NEAR(sz2 / N, 1.0, 3.0 * std::sqrt(2.0 / N));
}

TEST(Simulate, SameSeedSameOutput) {
  const GmHmm m = sp500_model();
  const SimOutput a = simulate(m, 500, 42);
  const SimOutput b = simulate(m, 500, 42);
  EXPECT_EQ(a.states.states, b.states.states);
  for (int t = 0; t < 500; ++t) EXPECT_EQ(a.obs[t](0), b.obs[t](0));
  const SimOutput c = simulate(m, 500, 43);
  EXPECT_NE(a.obs[0](0), c.obs[0](0));
}

TEST(Simulate, StartsFromPointMassAndStaysInAbsorbingState) {
  GmHmm m = sp500_model();
  m.trans.a << 1.0, 0.0, 0.3, 0.7;
  m.pi.p << 1.0, 0.0;
  const SimOutput s = simulate(m, 200, 5);
  for (int q : s.states.states) EXPECT_EQ(q, 0);
}

TEST(Simulate, RejectsBadArguments) {
  EXPECT_THROW(simulate(sp500_model(), 0, 1), InputError);
  GmHmm bad = sp500_model();
  bad.trans.a(0, 0) = 0.5;
  EXPECT_THROW(simulate(bad, 10, 1), InputError);
}

// Long-run frequencies approach the chain's invariant law and transition rows.
TEST(Simulate, OccupancyAndTransitionFrequencies) {
  const GmHmm m = sp500_model();
  const int T = 100000;
  const SimOutput s = simulate(m, T, 2718);
  Matrix counts = Matrix::Zero(2, 2);
  int in_one = 0;
  for (int t = 0; t < T; ++t) {
    in_one += s.states.states[static_cast<std::size_t>(t)] == 0;
    if (t + 1 < T) counts(s.states.states[static_cast<std::size_t>(t)], s.states.states[static_cast<std::size_t>(t + 1)]) += 1.0;
  }
  EXPECT_NEAR(static_cast<double>(in_one) / T, 0.82 / 1.04, 0.01);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(counts(i, j) / counts.row(i).sum(), m.trans(i, j), 0.01);
  }
}

TEST(Simulate, PerRegimeMomentsMatchMixtures) {
  const GmHmm m = sp500_model();
  const int T = 100000;
  const SimOutput s = simulate(m, T, 3141);
  for (int j = 0; j < 2; ++j) {
    double n = 0.0, sum = 0.0, sum2 = 0.0;
    for (int t = 0; t < T; ++t) {
      if (s.states.states[static_cast<std::size_t>(t)] != j) continue;
      const double x = s.obs[t](0);
      n += 1.0;
      sum += x;
      sum2 += x * x;
    }
    const MixtureMoments mm = gm_moments(m.emissions[static_cast<std::size_t>(j)]);
    const double mean = sum / n;
    EXPECT_NEAR(mean, mm.mean(0), 3.0 * std::sqrt(mm.cov(0, 0) / n));
    // The variance check uses a generous kurtosis allowance for heavy mixtures.
    EXPECT_NEAR(sum2 / n - mean * mean, mm.cov(0, 0), 3.0 * std::sqrt(100.0 / n) * mm.cov(0, 0));
  }
}

TEST(Simulate, MultivariateUsesCovariance) {
  GmHmm m;
  m.trans.a = Matrix::Ones(1, 1);
  m.pi.p = Vector::Ones(1);
  GaussianMixture gm;
  gm.weights = Vector::Ones(1);
  Matrix cov(2, 2);
  cov << 1.0, 0.8, 0.8, 1.0;
  gm.components.push_back({Vector::Zero(2), cov});
  m.emissions.push_back(gm);
  const int T = 50000;
  const SimOutput s = simulate(m, T, 11);
  double sxy = 0.0;
  for (int t = 0; t < T; ++t) sxy += s.obs[t](0) * s.obs[t](1);
  EXPECT_NEAR(sxy / T, 0.8, 0.03);
}

}  // namespace
}  // namespace gmhmm
