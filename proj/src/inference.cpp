#include "gmhmm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gmhmm/density.hpp"

namespace gmhmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Largest exponent fed to exp() when forming b_j / scale; only reached for
// states the forward pass has already ruled out.
constexpr double kMaxRatioExponent = 700.0;

void check_dims(const GmHmm& m, const ObservationSeq& o) {
  require_valid(o);
  if (m.dim() != o.dim()) {
    throw InputError("model dimension " + std::to_string(m.dim()) +
                     " != observation dimension " + std::to_string(o.dim()));
  }
  if (m.states() < 1 || static_cast<int>(m.emissions.size()) != m.states()) {
    throw InputError("model needs one mixture per state");
  }
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace

EmissionTable evaluate_emissions(const GmHmm& m, const ObservationSeq& o) {
  check_dims(m, o);
  const int T = o.size();
  const int R = m.states();
  EmissionTable e;
  e.log_b.resize(T, R);
  e.log_terms.resize(static_cast<std::size_t>(R));
  std::vector<double> terms;
  for (int j = 0; j < R; ++j) {
    const MixtureDensity dens(m.emissions[static_cast<std::size_t>(j)]);
    Matrix& lt = e.log_terms[static_cast<std::size_t>(j)];
    lt.resize(T, dens.size());
    for (int t = 0; t < T; ++t) {
      e.log_b(t, j) = dens.log_terms(o[t], terms);
      for (int k = 0; k < dens.size(); ++k) lt(t, k) = terms[static_cast<std::size_t>(k)];
    }
  }
  return e;
}

TrellisResult forward(const GmHmm& m, const EmissionTable& e) {
  const int T = static_cast<int>(e.log_b.rows());
  const int R = m.states();
  if (T < 1) throw InputError("forward: empty observation sequence");
  if (e.log_b.cols() != R) throw InputError("forward: emission table has wrong state count");

  TrellisResult res;
  res.alpha_hat.resize(T, R);
  res.log_scales.resize(T);

  Vector pred = m.pi.p;
  Vector logterm(R);
  for (int t = 0; t < T; ++t) {
    if (t > 0) pred = m.trans.a.transpose() * res.alpha_hat.row(t - 1).transpose();
    double shift = kNegInf;
    for (int j = 0; j < R; ++j) {
      logterm(j) = safe_log(pred(j)) + e.log_b(t, j);
      shift = std::max(shift, logterm(j));
    }
    if (!std::isfinite(shift)) {
      throw NumericalError("forward: observation " + std::to_string(t + 1) +
                           " has zero probability under every reachable state");
    }
    double sum = 0.0;
    for (int j = 0; j < R; ++j) {
      const double v = std::exp(logterm(j) - shift);
      res.alpha_hat(t, j) = v;
      sum += v;
    }
    res.alpha_hat.row(t) /= sum;
    res.log_scales(t) = shift + std::log(sum);
  }
  res.log_likelihood = res.log_scales.sum();
  return res;
}

TrellisResult forward(const GmHmm& m, const ObservationSeq& o) {
  return forward(m, evaluate_emissions(m, o));
}

Matrix backward(const GmHmm& m, const EmissionTable& e, const Vector& log_scales) {
  const int T = static_cast<int>(e.log_b.rows());
  const int R = m.states();
  if (log_scales.size() != T) {
    throw InputError("backward: " + std::to_string(log_scales.size()) + " scales for " +
                     std::to_string(T) + " observations");
  }
  Matrix beta(T, R);
  beta.row(T - 1).setOnes();
  Vector weighted(R);
  for (int t = T - 2; t >= 0; --t) {
    for (int j = 0; j < R; ++j) {
      const double ratio = std::exp(std::min(e.log_b(t + 1, j) - log_scales(t + 1), kMaxRatioExponent));
      weighted(j) = ratio * beta(t + 1, j);
    }
    beta.row(t) = (m.trans.a * weighted).transpose();
  }
  return beta;
}

Matrix backward(const GmHmm& m, const ObservationSeq& o, const Vector& log_scales) {
  return backward(m, evaluate_emissions(m, o), log_scales);
}

TrellisResult forward_backward(const GmHmm& m, const ObservationSeq& o) {
  const EmissionTable e = evaluate_emissions(m, o);
  TrellisResult res = forward(m, e);
  res.beta_hat = backward(m, e, res.log_scales);
  return res;
}

double loglikelihood(const GmHmm& m, const ObservationSeq& o) {
  return forward(m, o).log_likelihood;
}

Posteriors posteriors(const GmHmm& m, const ObservationSeq& o) {
  const EmissionTable e = evaluate_emissions(m, o);
  const TrellisResult tr = [&] {
    TrellisResult r = forward(m, e);
    r.beta_hat = backward(m, e, r.log_scales);
    return r;
  }();
  const int T = o.size();
  const int R = m.states();

  Posteriors p;
  p.log_likelihood = tr.log_likelihood;
  p.gamma = tr.alpha_hat.cwiseProduct(tr.beta_hat);

  p.xi.reserve(static_cast<std::size_t>(std::max(T - 1, 0)));
  Vector next(R);
  for (int t = 0; t + 1 < T; ++t) {
    for (int j = 0; j < R; ++j) {
      const double ratio =
          std::exp(std::min(e.log_b(t + 1, j) - tr.log_scales(t + 1), kMaxRatioExponent));
      next(j) = ratio * tr.beta_hat(t + 1, j);
    }
    Matrix x = tr.alpha_hat.row(t).transpose().asDiagonal() * m.trans.a * next.asDiagonal();
    p.xi.push_back(std::move(x));
  }

  // Split each state's posterior across its components by responsibility.
  p.gamma_mix.resize(static_cast<std::size_t>(R));
  for (int j = 0; j < R; ++j) {
    const Matrix& lt = e.log_terms[static_cast<std::size_t>(j)];
    Matrix& gm = p.gamma_mix[static_cast<std::size_t>(j)];
    gm.resize(T, lt.cols());
    for (int t = 0; t < T; ++t) {
      const double hi = lt.row(t).maxCoeff();
      double sum = 0.0;
      for (Eigen::Index k = 0; k < lt.cols(); ++k) {
        gm(t, k) = std::isfinite(hi) ? std::exp(lt(t, k) - hi) : 1.0;
        sum += gm(t, k);
      }
      gm.row(t) *= p.gamma(t, j) / sum;
    }
  }
  return p;
}

DecodedPath viterbi(const GmHmm& m, const ObservationSeq& o) {
  const EmissionTable e = evaluate_emissions(m, o);
  const int T = o.size();
  const int R = m.states();

  Matrix log_a(R, R);
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < R; ++j) log_a(i, j) = safe_log(m.trans.a(i, j));

  Vector delta(R), next(R);
  std::vector<std::vector<int>> back(static_cast<std::size_t>(T), std::vector<int>(static_cast<std::size_t>(R), 0));
  for (int i = 0; i < R; ++i) delta(i) = safe_log(m.pi.p(i)) + e.log_b(0, i);

  for (int t = 1; t < T; ++t) {
    for (int j = 0; j < R; ++j) {
      int best = 0;
      double best_v = delta(0) + log_a(0, j);
      for (int i = 1; i < R; ++i) {
        const double v = delta(i) + log_a(i, j);
        if (v > best_v) {
          best_v = v;
          best = i;
        }
      }
      back[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] = best;
      next(j) = best_v + e.log_b(t, j);
    }
    delta.swap(next);
  }

  DecodedPath out;
  out.path.states.assign(static_cast<std::size_t>(T), 0);
  int last = 0;
  for (int i = 1; i < R; ++i)
    if (delta(i) > delta(last)) last = i;
  out.log_joint = delta(last);
  out.path.states[static_cast<std::size_t>(T - 1)] = last;
  for (int t = T - 1; t > 0; --t) {
    last = back[static_cast<std::size_t>(t)][static_cast<std::size_t>(last)];
    out.path.states[static_cast<std::size_t>(t - 1)] = last;
  }
  return out;
}

}  // namespace gmhmm
