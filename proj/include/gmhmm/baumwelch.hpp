#pragma once

// Baum-Welch (EM) calibration of Gaussian-mixture HMMs and the
// sign-split initialization used for return series.

#include <cstdint>
#include <string>
#include <vector>

#include "gmhmm/core.hpp"
#include "gmhmm/inference.hpp"

namespace gmhmm {

struct FitConfig {
  int max_iters = 500;
  double rel_tol = 1e-7;               // stop when (ll_k - ll_{k-1}) <= rel_tol * |ll_{k-1}|
  double variance_floor_scale = 1e-6;  // see variance_floor()
  std::uint64_t seed = 0;              // drives restart perturbations only
  int restarts = 0;                    // extra perturbed starts on top of the given init
  int threads = 1;                     // concurrent restarts; 0 means hardware concurrency

  /// Throws InputError when a field is out of range.
  void validate() const;
};

struct FitReport {
  GmHmm model;
  std::vector<double> loglik_trace;  // log p(O | model) at every E-step
  int iterations = 0;
  bool converged = false;
  int restart = 0;                   // which start produced the model (0 = given init)
  double variance_floor = 0.0;

  double final_loglik() const { return loglik_trace.back(); }
};

/// Allowed decrease of the log-likelihood between EM iterations.
inline constexpr double kMonotoneSlack = 1e-8;

/// Below this total posterior mass a regime is considered starved.
inline constexpr double kStarvedOccupancy = 1e-12;

/// Re-estimates {A, B, pi} from the posteriors of `previous` on `o`.
/// Components with zero responsibility keep their previous mean and
/// covariance; a transition row with no outgoing mass is kept as well.
/// Covariances are raised to `variance_floor`.
/// Throws StarvedStateError when a regime's occupancy is below kStarvedOccupancy.
GmHmm m_step(const ObservationSeq& o, const Posteriors& post, const GmHmm& previous,
             double variance_floor);

/// Single EM run from `init`.
/// Throws NumericalError("EM monotonicity violated ...") if the likelihood
/// ever drops by more than kMonotoneSlack.
FitReport fit(const ObservationSeq& o, const GmHmm& init, const FitConfig& cfg);

/// fit() from `init` plus cfg.restarts starts whose component means are
/// shifted by uniform(-0.25, 0.25) data standard deviations. The best final
/// log-likelihood wins; ties go to the lowest restart index. Restarts that
/// fail are skipped; if every start fails the error of start 0 is rethrown.
FitReport fit_multistart(const ObservationSeq& o, const GmHmm& init, const FitConfig& cfg);

// Initialization ---------------------------------------------------------

/// Probability of the up regime (state 1): 0.5 at a zero first return,
/// rising linearly to 1 at +1 std and falling to 0 at -1 std. The other
/// states share the remainder equally. A zero std gives a uniform vector.
InitialDistribution init_pi(double first_return, double return_std, int states);

/// init_pi using the first coordinate of o (first return, sample std).
InitialDistribution init_pi(const ObservationSeq& o, int states);

/// [[0.6, 0.4], [0.7, 0.3]] for two regimes. Otherwise state 1 keeps 0.6,
/// every other state returns to state 1 with 0.7, and the rest of each row
/// is spread uniformly.
TransitionMatrix init_transition(int states);

struct EmissionInit {
  std::vector<GaussianMixture> mixtures;
  std::vector<std::string> warnings;
  std::vector<std::vector<int>> splits;  // observation indices per state
};

/// Splits the data by regime and fits a K-component moment mixture in each
/// split. Two regimes: positive first coordinate goes to state 1, the rest
/// to state 2. More regimes: equal-count rank bands of the first
/// coordinate, highest band first. Within a split the components sit at
/// mean + (k - (K-1)/2) * std with equal weights and the split's sample
/// covariance. Splits with fewer than n+1 points use the global moments.
EmissionInit init_emissions(const ObservationSeq& o, int states, int components,
                            double variance_floor);

/// init_pi + init_transition + init_emissions.
GmHmm initial_model(const ObservationSeq& o, int states, int components, double variance_floor,
                    std::vector<std::string>* warnings = nullptr);

}  // namespace gmhmm
