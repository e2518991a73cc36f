#include "gmhmm/hamilton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gmhmm/nelder_mead.hpp"
#include "gmhmm/sim.hpp"

namespace gmhmm {

TransitionMatrix HamiltonTheta::transition() const {
  Matrix a(2, 2);
  a << 1.0 - a12, a12, a21, 1.0 - a21;
  return TransitionMatrix(std::move(a));
}

void HamiltonTheta::validate(bool strict) const {
  if (!std::isfinite(u1) || !std::isfinite(u2)) throw InputError("theta: means must be finite");
  if (!(phi1 > 0.0) || !(phi2 > 0.0) || !std::isfinite(phi1) || !std::isfinite(phi2)) {
    throw InputError("theta: variances must be positive");
  }
  if (strict) {
    if (!(a12 > 0.0 && a12 < 1.0) || !(a21 > 0.0 && a21 < 1.0)) {
      throw InputError("theta: a12 and a21 must lie strictly inside (0, 1)");
    }
  } else if (!(a12 >= 0.0 && a12 <= 1.0) || !(a21 >= 0.0 && a21 <= 1.0) || !(a12 + a21 > 0.0)) {
    throw InputError("theta: a12 and a21 must lie in [0, 1] with a positive sum");
  }
}

namespace {

// Primitive (irreducible and aperiodic) iff some power up to
// (R-1)^2 + 1 has every entry positive.
bool is_primitive(const Matrix& a) {
  const auto R = a.rows();
  using Bool = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
  const Bool base = (a.array() > 0.0).cast<int>();
  Bool power = base;
  const auto limit = (R - 1) * (R - 1) + 1;
  for (Eigen::Index k = 1; k <= limit; ++k) {
    if ((power.array() > 0).all()) return true;
    power = ((power * base).array() > 0).cast<int>();
  }
  return false;
}

void require_primitive(const TransitionMatrix& trans) {
  const auto& a = trans.a;
  if (a.rows() < 1 || a.rows() != a.cols()) throw InputError("transition matrix must be square");
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (std::abs(a.row(i).sum() - 1.0) > kStochasticTol || (a.row(i).array() < 0.0).any()) {
      throw InputError("transition matrix row " + std::to_string(i + 1) + " is not stochastic");
    }
  }
  if (!is_primitive(a)) {
    throw InputError("transition matrix is reducible or periodic; no unique invariant distribution");
  }
}

double normal_logpdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * d * d / var;
}

double sigmoid(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return std::clamp(s, 1e-12, 1.0 - 1e-12);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

Vector invariant_distribution_solve(const TransitionMatrix& trans) {
  require_primitive(trans);
  const auto R = trans.a.rows();
  // (A^T - I) eta = 0 with the last equation replaced by sum(eta) = 1.
  Matrix sys = trans.a.transpose() - Matrix::Identity(R, R);
  sys.row(R - 1).setOnes();
  Vector rhs = Vector::Zero(R);
  rhs(R - 1) = 1.0;
  Vector eta = sys.fullPivLu().solve(rhs);
  if (!eta.allFinite() || (eta.array() <= 0.0).any()) {
    throw InputError("invariant distribution is not strictly positive");
  }
  return eta / eta.sum();
}

Vector invariant_distribution(const TransitionMatrix& trans) {
  if (trans.states() != 2) return invariant_distribution_solve(trans);
  require_primitive(trans);
  const double a12 = trans(0, 1);
  const double a21 = trans(1, 0);
  Vector eta(2);
  eta(0) = a21 / (a12 + a21);
  eta(1) = 1.0 - eta(0);
  return eta;
}

double hamilton_loglik(const HamiltonTheta& theta, const ObservationSeq& o) {
  theta.validate(false);
  require_valid(o);
  if (o.dim() != 1) throw InputError("the Hamilton filter takes scalar observations");

  const double a[2][2] = {{1.0 - theta.a12, theta.a12}, {theta.a21, 1.0 - theta.a21}};
  const double mean[2] = {theta.u1, theta.u2};
  const double var[2] = {theta.phi1, theta.phi2};

  // p(q_{t-1} = i | O_1..O_{t-1}); before the first step this is eta.
  const double eta1 = theta.a21 / (theta.a12 + theta.a21);
  double filt[2] = {eta1, 1.0 - eta1};
  double ll = 0.0;

  for (int t = 0; t < o.size(); ++t) {
    const double x = o[t](0);
    const double lp[2] = {normal_logpdf(x, mean[0], var[0]), normal_logpdf(x, mean[1], var[1])};
    const double shift = std::max(lp[0], lp[1]);
    const double p[2] = {std::exp(lp[0] - shift), std::exp(lp[1] - shift)};

    // joint[i][j] = p(q_{t-1}=i | past) p(q_t=j | q_{t-1}=i) f(O_t | q_t=j).
    double joint_to[2] = {0.0, 0.0};
    if (t == 0) {
      joint_to[0] = filt[0] * p[0];
      joint_to[1] = filt[1] * p[1];
    } else {
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) joint_to[j] += filt[i] * a[i][j] * p[j];
    }
    const double f = joint_to[0] + joint_to[1];
    ll += std::log(f) + shift;
    filt[0] = joint_to[0] / f;
    filt[1] = joint_to[1] / f;
  }
  return ll;
}

HamiltonTheta theta_from_model(const GmHmm& m) {
  require_valid(m);
  if (m.states() != 2 || m.dim() != 1 || m.emissions[0].size() != 1 || m.emissions[1].size() != 1) {
    throw InputError("Hamilton parameters need a 2-state, single-component, scalar model");
  }
  const auto& c1 = m.emissions[0].components[0];
  const auto& c2 = m.emissions[1].components[0];
  return {c1.mean(0), c2.mean(0), c1.cov(0, 0), c2.cov(0, 0), m.trans(0, 1), m.trans(1, 0)};
}

GmHmm model_from_theta(const HamiltonTheta& theta) {
  theta.validate(false);
  GmHmm m;
  m.trans = theta.transition();
  m.pi = InitialDistribution(invariant_distribution(m.trans));
  for (const auto& [u, phi] : {std::pair{theta.u1, theta.phi1}, std::pair{theta.u2, theta.phi2}}) {
    GaussianMixture gm;
    gm.weights = Vector::Ones(1);
    gm.components.push_back({Vector::Constant(1, u), Matrix::Constant(1, 1, phi)});
    m.emissions.push_back(std::move(gm));
  }
  return m;
}

HamiltonFit hamilton_fit(const ObservationSeq& o, const HamiltonTheta& init,
                         const HamiltonFitConfig& cfg) {
  require_valid(o);
  if (o.size() < 2) throw InputError("hamilton_fit needs at least two observations");
  if (cfg.n_starts < 1) throw InputError("hamilton_fit needs at least one start");
  init.validate();

  const double floor = cfg.variance_floor;
  auto decode = [floor](const Vector& x) {
    return HamiltonTheta{x(0), x(1), floor + std::exp(x(2)), floor + std::exp(x(3)),
                         sigmoid(x(4)), sigmoid(x(5))};
  };
  auto encode = [floor](const HamiltonTheta& th) {
    Vector x(6);
    x << th.u1, th.u2, std::log(std::max(th.phi1 - floor, floor)),
        std::log(std::max(th.phi2 - floor, floor)), logit(th.a12), logit(th.a21);
    return x;
  };
  auto objective = [&](const Vector& x) {
    const HamiltonTheta th = decode(x);
    const double ll = hamilton_loglik(th, o);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  };

  const double init_ll = hamilton_loglik(init, o);
  const Vector x0 = encode(init);

  // Means move on the data's scale; transformed parameters on unit scale.
  double sd = 0.0;
  {
    double mean = 0.0;
    for (const auto& v : o.obs) mean += v(0);
    mean /= o.size();
    for (const auto& v : o.obs) sd += (v(0) - mean) * (v(0) - mean);
    sd = std::sqrt(sd / (o.size() - 1));
    if (!(sd > 0.0)) sd = 1.0;
  }

  HamiltonFit best{init, init_ll, false, 0};
  CounterRng rng(cfg.seed, 0x48414D494C544F4EULL);
  for (int s = 0; s < cfg.n_starts; ++s) {
    Vector start = x0;
    if (s > 0) {
      start(0) += sd * rng.normal();
      start(1) += sd * rng.normal();
      for (int i = 2; i < 6; ++i) start(i) += 0.5 * rng.normal();
    }
    NelderMeadOptions opt;
    opt.max_evals = cfg.max_evals;
    opt.ftol = cfg.ftol;
    opt.xtol = cfg.xtol;
    // The simplex is rescaled per coordinate by running in z = x / scale.
    Vector scale(6);
    scale << 0.5 * sd, 0.5 * sd, 1.0, 1.0, 1.0, 1.0;
    auto scaled = [&](const Vector& z) { return objective(z.cwiseProduct(scale)); };

    Vector z = start.cwiseQuotient(scale);
    NelderMeadResult r;
    int evals = 0;
    // Restart the simplex at its own optimum until it stops moving.
    for (int pass = 0; pass < 4; ++pass) {
      const double before = pass == 0 ? std::numeric_limits<double>::infinity() : r.fx;
      r = nelder_mead(scaled, z, opt);
      evals += r.evaluations;
      z = r.x;
      if (pass > 0 && !(r.fx < before - 1e-12 * std::abs(before))) break;
    }
    best.evaluations += evals;
    const double ll = -r.fx;
    if (std::isfinite(ll) && ll > best.loglik) {
      best.theta = decode(z.cwiseProduct(scale));
      best.loglik = ll;
      best.converged = r.converged;
    }
  }
  return best;
}

}  // namespace gmhmm
