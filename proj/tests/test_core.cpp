#include <gtest/gtest.h>

#include "gmhmm/core.hpp"
#include "gmhmm/model_io.hpp"
#include "oracle.hpp"

namespace gmhmm {
namespace {

GmHmm two_state_model() {
  GmHmm m;
  m.trans.a.resize(2, 2);
  m.trans.a << 0.9, 0.1, 0.2, 0.8;
  m.pi.p = Vector::Constant(2, 0.5);
  for (double mu : {0.1, -0.1}) {
    GaussianMixture gm;
    gm.weights = Vector::Ones(1);
    gm.components.push_back({Vector::Constant(1, mu), Matrix::Constant(1, 1, 0.01)});
    m.emissions.push_back(gm);
  }
  return m;
}

TEST(ValidateModel, AcceptsStochasticRows) {
  EXPECT_TRUE(validate_model(two_state_model()).ok());
}

TEST(ValidateModel, ReportsRowSumViolation) {
  GmHmm m = two_state_model();
  m.trans.a << 0.8, 0.1, 0.2, 0.8;
  const Validation v = validate_model(m);
  ASSERT_FALSE(v.ok());
  ASSERT_EQ(v.violations.size(), 1u);
  EXPECT_NE(v.violations[0].constraint.find("row 1 sum 0.9"), std::string::npos);
  EXPECT_NEAR(v.violations[0].residual, -0.1, 1e-12);
}

TEST(ValidateModel, AcceptsCalibratedSp500Model) {
  const GmHmm m = load_model(oracle::data_path("sp500_calibrated_model.json"));
  EXPECT_TRUE(validate_model(m).ok()) << validate_model(m).summary();
  EXPECT_DOUBLE_EQ(m.pi[0], 1e-6);
  EXPECT_DOUBLE_EQ(m.trans(1, 0), 0.82);
}

TEST(ValidateModel, FlagsEachBrokenInvariant) {
  GmHmm m = two_state_model();
  m.pi.p << 0.7, 0.7;
  m.emissions[1].weights << 1.2;
  m.emissions[0].components[0].cov(0, 0) = -1.0;
  const Validation v = validate_model(m);
  EXPECT_GE(v.violations.size(), 3u);
  const std::string s = v.summary();
  EXPECT_NE(s.find("pi"), std::string::npos);
  EXPECT_NE(s.find("mixtures[2].weights"), std::string::npos);
  EXPECT_NE(s.find("smallest eigenvalue"), std::string::npos);
}

TEST(ValidateModel, RejectsAsymmetricCovarianceAndDimensionMismatch) {
  GmHmm m = two_state_model();
  m.emissions[0].components[0].mean = Vector::Zero(2);
  m.emissions[0].components[0].cov = Matrix::Identity(2, 2);
  m.emissions[0].components[0].cov(0, 1) = 0.3;
  EXPECT_FALSE(validate_model(m).ok());

  GmHmm n = two_state_model();
  n.emissions.pop_back();
  EXPECT_FALSE(validate_model(n).ok());
}

TEST(ValidateModel, VarianceFloorIsEnforced) {
  const GmHmm m = two_state_model();
  EXPECT_TRUE(validate_model(m, 0.01).ok());
  EXPECT_FALSE(validate_model(m, 0.02).ok());
}

TEST(ValidateModel, IdempotentAndPure) {
  GmHmm m = two_state_model();
  m.trans.a(0, 0) = 0.5;
  const GmHmm copy = m;
  const auto a = validate_model(m).summary();
  const auto b = validate_model(m).summary();
  EXPECT_EQ(a, b);
  EXPECT_TRUE(m.trans.a.isApprox(copy.trans.a));
}

TEST(ValidateModel, DegenerateSingleStateSingleComponent) {
  GmHmm m;
  m.trans.a = Matrix::Ones(1, 1);
  m.pi.p = Vector::Ones(1);
  GaussianMixture gm;
  gm.weights = Vector::Ones(1);
  gm.components.push_back({Vector::Zero(1), Matrix::Ones(1, 1)});
  m.emissions.push_back(gm);
  EXPECT_TRUE(validate_model(m).ok());
}

TEST(Observations, RaggedOrEmptyRejected) {
  EXPECT_THROW(require_valid(ObservationSeq{}), InputError);
  ObservationSeq o({Vector::Zero(1), Vector::Zero(2)});
  EXPECT_THROW(require_valid(o), InputError);
}

TEST(StateSequence, OneBasedView) {
  StateSequence s{{0, 1, 1, 0}};
  EXPECT_EQ(s.one_based(), (std::vector<int>{1, 2, 2, 1}));
}

TEST(PermuteStates, MovesRowsColumnsAndEmissions) {
  const GmHmm m = two_state_model();
  const GmHmm p = permute_states(m, {1, 0});
  EXPECT_DOUBLE_EQ(p.trans(0, 0), 0.8);
  EXPECT_DOUBLE_EQ(p.trans(0, 1), 0.2);
  EXPECT_DOUBLE_EQ(p.emissions[0].components[0].mean(0), -0.1);
  EXPECT_TRUE(validate_model(p).ok());
}

}  // namespace
}  // namespace gmhmm
