#pragma once

// Hamilton filter for the two-regime, single-Gaussian, scalar model.
//
// The chain starts in its invariant distribution and the likelihood is
// accumulated one observation at a time from the filtered regime
// probabilities. It is the baseline estimator against which Baum-Welch
// calibration is compared.

#include <cstdint>

#include "gmhmm/core.hpp"

namespace gmhmm {

/// Theta = {u1, u2, phi1, phi2, a12, a21}. Rows are stochastic, so
/// a11 = 1 - a12 and a22 = 1 - a21.
struct HamiltonTheta {
  double u1 = 0.0;
  double u2 = 0.0;
  double phi1 = 1.0;  // variance of regime 1
  double phi2 = 1.0;  // variance of regime 2
  double a12 = 0.5;
  double a21 = 0.5;

  TransitionMatrix transition() const;
  /// Regime labels swapped.
  HamiltonTheta swapped() const { return {u2, u1, phi2, phi1, a21, a12}; }
  /// Throws InputError unless variances are positive and a12, a21 lie in
  /// (0, 1). The relaxed form admits the closed interval as long as
  /// a12 + a21 > 0, which is all the filter itself needs.
  void validate(bool strict = true) const;
};

/// Stationary distribution eta with eta^T A = eta^T.
/// Two regimes use eta_1 = a21 / (a12 + a21); larger chains solve the
/// left-eigenvector system directly.
/// Throws InputError for a reducible or periodic chain.
Vector invariant_distribution(const TransitionMatrix& trans);

/// Same quantity by the linear solve regardless of R.
Vector invariant_distribution_solve(const TransitionMatrix& trans);

/// Log-likelihood sum_t log f(O_t | O_1..O_{t-1}, theta). Scalar data only.
double hamilton_loglik(const HamiltonTheta& theta, const ObservationSeq& o);

/// Theta of a 2-state, K=1, n=1 GmHmm (its pi is ignored).
HamiltonTheta theta_from_model(const GmHmm& m);

/// GmHmm with the theta's parameters and pi = invariant distribution.
GmHmm model_from_theta(const HamiltonTheta& theta);

struct HamiltonFitConfig {
  int n_starts = 5;          // start 0 is the given theta, others are perturbed
  int max_evals = 20000;     // per simplex run
  double ftol = 1e-12;
  double xtol = 1e-9;
  double variance_floor = 1e-12;
  std::uint64_t seed = 0;
};

struct HamiltonFit {
  HamiltonTheta theta;
  double loglik = 0.0;
  bool converged = false;
  int evaluations = 0;
};

/// Maximizes hamilton_loglik by simplex search over
/// (u1, u2, log(phi1 - floor), log(phi2 - floor), logit a12, logit a21).
/// Never returns a theta worse than `init`; if no start improves on it,
/// `init` comes back with converged = false.
HamiltonFit hamilton_fit(const ObservationSeq& o, const HamiltonTheta& init,
                         const HamiltonFitConfig& cfg = {});

}  // namespace gmhmm
