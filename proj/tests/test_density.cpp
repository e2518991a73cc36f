#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gmhmm/density.hpp"
#include "gmhmm/model_io.hpp"
#include "oracle.hpp"

namespace gmhmm {
namespace {

GaussianComponent scalar(double mean, double var) {
  return {Vector::Constant(1, mean), Matrix::Constant(1, 1, var)};
}

GaussianMixture up_regime() {
  return load_model(oracle::data_path("sp500_calibrated_model.json")).emissions[0];
}

TEST(MultinormalLogpdf, StandardNormalAtZero) {
  EXPECT_NEAR(multinormal_logpdf(Vector::Zero(1), scalar(0.0, 1.0)), -0.9189385332046727, 1e-15);
  // Independent 2-d: sum of marginals.
  GaussianComponent c{Vector::Zero(2), Matrix::Identity(2, 2)};
  EXPECT_NEAR(multinormal_logpdf(Vector::Zero(2), c), 2 * -0.9189385332046727, 1e-14);
}

TEST(MultinormalLogpdf, FrozenValue) {
  // Computed to 20 digits in extended precision.
  EXPECT_NEAR(multinormal_logpdf(Vector::Constant(1, 0.012), scalar(0.148, 0.045 * 0.045)),
              -2.38475932423976902736, 1e-13);
}

TEST(MultinormalLogpdf, MatchesClosedFormBivariate) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    GaussianComponent c{Vector::Random(2), oracle::random_spd(rng, 2)};
    const Vector x = Vector::Random(2) * 2.0;
    EXPECT_NEAR(multinormal_logpdf(x, c), std::log(oracle::component_pdf(x, c)), 1e-12);
  }
}

TEST(MultinormalLogpdf, Errors) {
  EXPECT_THROW(multinormal_logpdf(Vector::Zero(2), scalar(0.0, 1.0)), InputError);
  GaussianComponent bad{Vector::Zero(2), Matrix::Identity(2, 2)};
  bad.cov(1, 1) = -0.5;
  try {
    multinormal_logpdf(Vector::Zero(2), bad);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("-0.5"), std::string::npos) << e.what();
  }
}

TEST(GmLogpdf, FrozenValueForUpRegime) {
  EXPECT_NEAR(gm_logpdf(Vector::Constant(1, 0.13), up_regime()), 2.07312892274064312706, 1e-13);
}

TEST(GmLogpdf, SingleComponentEqualsComponentDensity) {
  GaussianMixture gm;
  gm.weights = Vector::Ones(1);
  gm.components.push_back(scalar(0.3, 0.2));
  const Vector x = Vector::Constant(1, -0.4);
  EXPECT_DOUBLE_EQ(gm_logpdf(x, gm), multinormal_logpdf(x, gm.components[0]));
}

// Property: the mixture density integrates to one.
TEST(GmLogpdf, IntegratesToOne) {
  for (const auto& gm : load_model(oracle::data_path("sp500_calibrated_model.json")).emissions) {
    const double lo = -8.0, hi = 8.0;
    const int steps = 400000;
    const double h = (hi - lo) / steps;
    double s = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
      s += w * std::exp(gm_logpdf(Vector::Constant(1, lo + i * h), gm));
    }
    EXPECT_NEAR(s * h, 1.0, 1e-3);
  }
}

// Property: reordering components leaves the density unchanged.
TEST(GmLogpdf, ComponentOrderDoesNotMatter) {
  std::mt19937_64 rng(5);
  const GmHmm m = oracle::random_model(rng, 1, 4, 2);
  GaussianMixture gm = m.emissions[0];
  GaussianMixture rev = gm;
  std::reverse(rev.components.begin(), rev.components.end());
  rev.weights = gm.weights.reverse();
  for (int i = 0; i < 30; ++i) {
    const Vector x = Vector::Random(2) * 3.0;
    EXPECT_NEAR(gm_logpdf(x, gm), gm_logpdf(x, rev), 1e-12);
  }
}

TEST(GmLogpdf, SymmetricAboutCommonMean) {
  GaussianMixture gm;
  gm.weights = Vector::Constant(2, 0.5);
  gm.components = {scalar(1.0, 0.5), scalar(1.0, 3.0)};
  for (double d : {0.1, 0.7, 2.5}) {
    EXPECT_NEAR(gm_logpdf(Vector::Constant(1, 1.0 + d), gm), gm_logpdf(Vector::Constant(1, 1.0 - d), gm),
                1e-14);
  }
}

TEST(GmLogpdf, ClampsAndCountsUnderflow) {
  const std::uint64_t before = underflow_clamp_count();
  GaussianMixture gm;
  gm.weights = Vector::Ones(1);
  gm.components.push_back(scalar(0.0, 1e-4));
  EXPECT_EQ(gm_logpdf(Vector::Constant(1, 50.0), gm), kLogDensityFloor);
  EXPECT_GT(underflow_clamp_count(), before);
}

TEST(GmMoments, UpRegimeOverallMoments) {
  const MixtureMoments mm = gm_moments(up_regime());
  EXPECT_NEAR(mm.mean(0) * 100.0, 14.8, 1e-12);
  EXPECT_NEAR(std::sqrt(mm.cov(0, 0)) * 100.0, 11.6473172876847, 1e-10);
}

// Property: moments agree with a large independent sample.
TEST(GmMoments, MatchesMonteCarlo) {
  std::mt19937_64 rng(17);
  const GaussianMixture gm = up_regime();
  const MixtureMoments mm = gm_moments(gm);
  std::discrete_distribution<int> pick({gm.weights(0), gm.weights(1)});
  std::normal_distribution<double> z;
  const int N = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const auto& c = gm.components[static_cast<std::size_t>(pick(rng))];
    const double x = c.mean(0) + std::sqrt(c.cov(0, 0)) * z(rng);
    s += x;
    s2 += x * x;
  }
  const double mean = s / N;
  const double var = s2 / N - mean * mean;
  const double sd = std::sqrt(mm.cov(0, 0));
  EXPECT_NEAR(mean, mm.mean(0), 3.0 * sd / std::sqrt(N));
  // Var of the sample variance: (m4 - var^2) / N; bound m4 loosely by 10 var^2.
  EXPECT_NEAR(var, mm.cov(0, 0), 3.0 * std::sqrt(9.0) * mm.cov(0, 0) / std::sqrt(N));
}

TEST(FloorCovariance, RaisesOnlySmallEigenvalues) {
  Matrix c(2, 2);
  c << 1.0, 0.0, 0.0, 1e-9;
  const Matrix f = floor_covariance(c, 1e-4);
  EXPECT_NEAR(f(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(f(1, 1), 1e-4, 1e-14);
  EXPECT_EQ(floor_covariance(c, 1e-10), c);
}

TEST(VarianceFloor, ScalesMedianDiagonal) {
  const ObservationSeq o = ObservationSeq::from_scalars({1.0, 2.0, 3.0});
  EXPECT_NEAR(variance_floor(o, 1e-6), 1e-6, 1e-18);  // sample variance is 1
  EXPECT_DOUBLE_EQ(variance_floor(ObservationSeq::from_scalars({2.0, 2.0}), 1e-6), 1e-6);
}

}  // namespace
}  // namespace gmhmm
