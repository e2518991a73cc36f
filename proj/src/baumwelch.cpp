#include "gmhmm/baumwelch.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include "gmhmm/density.hpp"
#include "gmhmm/sim.hpp"

namespace gmhmm {

void FitConfig::validate() const {
  if (max_iters < 1) throw InputError("max_iters must be at least 1");
  if (!(rel_tol > 0.0)) throw InputError("rel_tol must be positive");
  if (!(variance_floor_scale > 0.0)) throw InputError("variance_floor_scale must be positive");
  if (restarts < 0) throw InputError("restarts must be non-negative");
  if (threads < 0) throw InputError("threads must be non-negative");
}

GmHmm m_step(const ObservationSeq& o, const Posteriors& post, const GmHmm& previous,
             double variance_floor) {
  const int T = o.size();
  const int R = previous.states();
  const int n = o.dim();
  const Matrix& gamma = post.gamma;
  if (gamma.rows() != T || gamma.cols() != R ||
      static_cast<int>(post.xi.size()) != std::max(T - 1, 0) ||
      static_cast<int>(post.gamma_mix.size()) != R) {
    throw InputError("m_step: posterior shapes do not match the model and observations");
  }

  for (int j = 0; j < R; ++j) {
    const double occ = gamma.col(j).sum();
    if (!(occ >= kStarvedOccupancy)) throw StarvedStateError(j, occ);
  }

  GmHmm next;

  // Transitions: expected i->j counts over expected visits to i before T.
  next.trans.a = previous.trans.a;
  if (T > 1) {
    Matrix counts = Matrix::Zero(R, R);
    for (const auto& x : post.xi) counts += x;
    for (int i = 0; i < R; ++i) {
      const double visits = counts.row(i).sum();
      if (visits > std::numeric_limits<double>::min()) next.trans.a.row(i) = counts.row(i) / visits;
    }
  }

  next.pi.p = gamma.row(0).transpose() / gamma.row(0).sum();

  next.emissions.resize(static_cast<std::size_t>(R));
  for (int j = 0; j < R; ++j) {
    const auto& prev_gm = previous.emissions[static_cast<std::size_t>(j)];
    const Matrix& gm = post.gamma_mix[static_cast<std::size_t>(j)];
    const int K = prev_gm.size();
    if (gm.rows() != T || gm.cols() != K) {
      throw InputError("m_step: component posterior shape mismatch for state " + std::to_string(j + 1));
    }
    GaussianMixture& out = next.emissions[static_cast<std::size_t>(j)];
    out.components = prev_gm.components;
    const Vector mass = gm.colwise().sum().transpose();
    out.weights = mass / mass.sum();
    for (int k = 0; k < K; ++k) {
      const double w = mass(k);
      if (!(w > std::numeric_limits<double>::min())) continue;
      Vector mean = Vector::Zero(n);
      for (int t = 0; t < T; ++t) mean += gm(t, k) * o[t];
      mean /= w;
      Matrix cov = Matrix::Zero(n, n);
      for (int t = 0; t < T; ++t) {
        const Vector d = o[t] - mean;
        cov.noalias() += gm(t, k) * (d * d.transpose());
      }
      cov /= w;
      auto& comp = out.components[static_cast<std::size_t>(k)];
      comp.mean = std::move(mean);
      comp.cov = floor_covariance(cov, variance_floor);
    }
  }
  return next;
}

FitReport fit(const ObservationSeq& o, const GmHmm& init, const FitConfig& cfg) {
  cfg.validate();
  require_valid(o);
  require_valid(init);
  if (init.dim() != o.dim()) throw InputError("fit: model and data dimensions differ");

  FitReport rep;
  rep.variance_floor = variance_floor(o, cfg.variance_floor_scale);
  GmHmm model = init;
  for (auto& gm : model.emissions) gm = floor_mixture(std::move(gm), rep.variance_floor);

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const Posteriors post = posteriors(model, o);
    const double ll = post.log_likelihood;
    if (!std::isfinite(ll)) throw NumericalError("fit: non-finite log-likelihood");
    if (!rep.loglik_trace.empty()) {
      const double prev = rep.loglik_trace.back();
      const double gain = ll - prev;
      if (gain < -kMonotoneSlack) {
        std::ostringstream os;
        os.precision(17);
        os << "EM monotonicity violated at iteration " << it << ": " << prev << " -> " << ll;
        throw NumericalError(os.str());
      }
      rep.loglik_trace.push_back(ll);
      if (gain <= cfg.rel_tol * std::abs(prev)) {
        rep.converged = true;
        break;
      }
    } else {
      rep.loglik_trace.push_back(ll);
    }
    if (it == cfg.max_iters) break;
    model = m_step(o, post, model, rep.variance_floor);
  }
  rep.iterations = static_cast<int>(rep.loglik_trace.size());
  rep.model = std::move(model);
  return rep;
}

namespace {

GmHmm perturb_means(const GmHmm& init, const ObservationSeq& o, std::uint64_t seed, int restart) {
  const int n = o.dim();
  Vector mean = Vector::Zero(n);
  for (const auto& x : o.obs) mean += x;
  mean /= o.size();
  Vector sd = Vector::Zero(n);
  for (const auto& x : o.obs) sd += (x - mean).cwiseAbs2();
  sd = (sd / std::max(o.size() - 1, 1)).cwiseSqrt();

  // Stream offset keeps restart perturbations apart from simulation streams.
  CounterRng rng(seed, 0x5245535441525400ULL + static_cast<std::uint64_t>(restart));
  GmHmm out = init;
  for (auto& gm : out.emissions) {
    for (auto& c : gm.components) {
      for (int i = 0; i < n; ++i) c.mean(i) += (rng.uniform() - 0.5) * 0.5 * sd(i);
    }
  }
  return out;
}

}  // namespace

FitReport fit_multistart(const ObservationSeq& o, const GmHmm& init, const FitConfig& cfg) {
  cfg.validate();
  const int starts = cfg.restarts + 1;
  if (starts == 1) return fit(o, init, cfg);

  auto run = [&](int r) {
    const GmHmm start = r == 0 ? init : perturb_means(init, o, cfg.seed, r);
    FitReport rep = fit(o, start, cfg);
    rep.restart = r;
    return rep;
  };

  struct Outcome {
    std::optional<FitReport> report;
    std::exception_ptr error;
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(starts));
  auto run_into = [&](int r) {
    try {
      outcomes[static_cast<std::size_t>(r)].report = run(r);
    } catch (...) {
      outcomes[static_cast<std::size_t>(r)].error = std::current_exception();
    }
  };

  int threads = cfg.threads == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : cfg.threads;
  threads = std::clamp(threads, 1, starts);
  if (threads == 1) {
    for (int r = 0; r < starts; ++r) run_into(r);
  } else {
    for (int base = 0; base < starts; base += threads) {
      std::vector<std::future<void>> batch;
      for (int r = base; r < std::min(starts, base + threads); ++r) {
        batch.push_back(std::async(std::launch::async, run_into, r));
      }
      for (auto& f : batch) f.get();
    }
  }

  std::optional<FitReport> best;
  for (auto& oc : outcomes) {
    if (!oc.report) continue;
    if (!best || oc.report->final_loglik() > best->final_loglik()) best = std::move(oc.report);
  }
  if (!best) std::rethrow_exception(outcomes.front().error);
  return std::move(*best);
}

// Initialization ---------------------------------------------------------

InitialDistribution init_pi(double first_return, double return_std, int states) {
  if (states < 1) throw InputError("init_pi: need at least one state");
  if (states == 1) return InitialDistribution(Vector::Ones(1));
  if (!(return_std > 0.0)) return InitialDistribution(Vector::Constant(states, 1.0 / states));
  const double z = first_return / return_std;
  const double up = first_return > 0.0 ? 0.5 + 0.5 * std::clamp(z, 0.0, 1.0)
                                       : 0.5 * std::clamp(1.0 + z, 0.0, 1.0);
  Vector p = Vector::Constant(states, (1.0 - up) / (states - 1));
  p(0) = up;
  return InitialDistribution(std::move(p));
}

InitialDistribution init_pi(const ObservationSeq& o, int states) {
  require_valid(o);
  const std::vector<double> x = o.first_coordinate();
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
  return init_pi(x.front(), sd, states);
}

TransitionMatrix init_transition(int states) {
  if (states < 1) throw InputError("init_transition: need at least one state");
  if (states == 1) return TransitionMatrix(Matrix::Ones(1, 1));
  Matrix a(states, states);
  for (int i = 0; i < states; ++i) {
    const double first = i == 0 ? 0.6 : 0.7;
    a(i, 0) = first;
    for (int j = 1; j < states; ++j) a(i, j) = (1.0 - first) / (states - 1);
  }
  return TransitionMatrix(std::move(a));
}

namespace {

struct Moments {
  Vector mean;
  Matrix cov;
};

Moments sample_moments(const ObservationSeq& o, const std::vector<int>& idx) {
  const int n = o.dim();
  Moments m{Vector::Zero(n), Matrix::Zero(n, n)};
  for (int t : idx) m.mean += o[t];
  m.mean /= static_cast<double>(idx.size());
  for (int t : idx) {
    const Vector d = o[t] - m.mean;
    m.cov.noalias() += d * d.transpose();
  }
  if (idx.size() > 1) m.cov /= static_cast<double>(idx.size() - 1);
  return m;
}

GaussianMixture moment_mixture(const Moments& mom, int K, double floor) {
  GaussianMixture gm;
  gm.weights = Vector::Constant(K, 1.0 / K);
  const Matrix cov = floor_covariance(mom.cov, floor);
  const Vector sd = cov.diagonal().cwiseSqrt();
  for (int k = 0; k < K; ++k) {
    const double offset = k - 0.5 * (K - 1);
    gm.components.push_back({mom.mean + offset * sd, cov});
  }
  return gm;
}

}  // namespace

EmissionInit init_emissions(const ObservationSeq& o, int states, int components,
                            double variance_floor) {
  require_valid(o);
  if (states < 1 || components < 1) throw InputError("init_emissions: R and K must be >= 1");
  const int T = o.size();
  const int n = o.dim();

  EmissionInit out;
  out.splits.resize(static_cast<std::size_t>(states));
  if (states == 1) {
    out.splits[0].resize(static_cast<std::size_t>(T));
    std::iota(out.splits[0].begin(), out.splits[0].end(), 0);
  } else if (states == 2) {
    for (int t = 0; t < T; ++t) out.splits[o[t](0) > 0.0 ? 0 : 1].push_back(t);
  } else {
    std::vector<int> order(static_cast<std::size_t>(T));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return o[a](0) > o[b](0); });
    for (int r = 0; r < T; ++r) {
      const auto band = static_cast<std::size_t>(static_cast<long long>(r) * states / T);
      out.splits[band].push_back(order[static_cast<std::size_t>(r)]);
    }
    for (auto& s : out.splits) std::sort(s.begin(), s.end());
  }

  std::vector<int> all(static_cast<std::size_t>(T));
  std::iota(all.begin(), all.end(), 0);
  const Moments global = sample_moments(o, all);

  for (int j = 0; j < states; ++j) {
    const auto& idx = out.splits[static_cast<std::size_t>(j)];
    if (static_cast<int>(idx.size()) < n + 1) {
      out.warnings.push_back("state " + std::to_string(j + 1) + " split has " +
                             std::to_string(idx.size()) +
                             " observations; using global moments");
      out.mixtures.push_back(moment_mixture(global, components, variance_floor));
    } else {
      out.mixtures.push_back(moment_mixture(sample_moments(o, idx), components, variance_floor));
    }
  }
  return out;
}

GmHmm initial_model(const ObservationSeq& o, int states, int components, double variance_floor,
                    std::vector<std::string>* warnings) {
  EmissionInit em = init_emissions(o, states, components, variance_floor);
  if (warnings) *warnings = em.warnings;
  GmHmm m;
  m.trans = init_transition(states);
  m.pi = init_pi(o, states);
  m.emissions = std::move(em.mixtures);
  return m;
}

}  // namespace gmhmm
