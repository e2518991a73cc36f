#pragma once

// Forward/backward recursions, state posteriors and Viterbi decoding for a
// fixed model. All routines are pure and reentrant.
//
// Scaling: each forward step is divided by its own sum, so every row of
// alpha_hat is a filtered distribution p(q_t | O_1..O_t). The log of each
// divisor is kept in log_scales and their total is log p(O | M). The
// backward pass reuses the same divisors, which makes
// alpha_hat(t, i) * beta_hat(t, i) = p(q_t = i | O, M).

#include <vector>

#include "gmhmm/core.hpp"

namespace gmhmm {

/// Per-step emission log-densities for one (model, observations) pair.
struct EmissionTable {
  Matrix log_b;                    // T x R, log b_j(O_t), clamped
  std::vector<Matrix> log_terms;   // per state: T x K_j, log c_jk + log p_jk(O_t)
};

EmissionTable evaluate_emissions(const GmHmm& m, const ObservationSeq& o);

struct TrellisResult {
  double log_likelihood = 0.0;
  Matrix alpha_hat;   // T x R
  Matrix beta_hat;    // T x R (left empty by forward())
  Vector log_scales;  // length T, log of each step's normalizer
};

/// Scaled forward recursion. beta_hat is not filled.
TrellisResult forward(const GmHmm& m, const ObservationSeq& o);
TrellisResult forward(const GmHmm& m, const EmissionTable& e);

/// Scaled backward recursion using the normalizers of a forward pass over
/// the same model and observations.
Matrix backward(const GmHmm& m, const ObservationSeq& o, const Vector& log_scales);
Matrix backward(const GmHmm& m, const EmissionTable& e, const Vector& log_scales);

/// forward() followed by backward().
TrellisResult forward_backward(const GmHmm& m, const ObservationSeq& o);

/// log p(O | M).
double loglikelihood(const GmHmm& m, const ObservationSeq& o);

struct Posteriors {
  double log_likelihood = 0.0;
  Matrix gamma;                  // T x R: p(q_t = i | O)
  std::vector<Matrix> xi;        // T-1 entries, each R x R: p(q_t = i, q_{t+1} = j | O)
  std::vector<Matrix> gamma_mix; // per state: T x K_j, p(q_t = j, component k | O)
};

Posteriors posteriors(const GmHmm& m, const ObservationSeq& o);

struct DecodedPath {
  StateSequence path;
  double log_joint = 0.0;  // log max_Q p(O, Q | M)
};

/// Max-product decoding in log space. Ties go to the lower state index.
DecodedPath viterbi(const GmHmm& m, const ObservationSeq& o);

}  // namespace gmhmm
