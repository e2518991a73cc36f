#include "gmhmm/density.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace gmhmm {

namespace {

std::atomic<std::uint64_t> g_clamps{0};

double clamp_log(double v) {
  if (v < kLogDensityFloor || std::isnan(v)) {
    g_clamps.fetch_add(1, std::memory_order_relaxed);
    return kLogDensityFloor;
  }
  return v;
}

double log_sum_exp(const std::vector<double>& terms) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : terms) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double v : terms) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

}  // namespace

std::uint64_t underflow_clamp_count() { return g_clamps.load(std::memory_order_relaxed); }

ComponentDensity::ComponentDensity(const GaussianComponent& comp) : mean_(comp.mean) {
  const auto n = comp.mean.size();
  if (comp.cov.rows() != n || comp.cov.cols() != n) {
    throw InputError("covariance shape does not match mean dimension " + std::to_string(n));
  }
  llt_.compute(comp.cov);
  if (llt_.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(comp.cov, Eigen::EigenvaluesOnly);
    std::ostringstream os;
    os << "covariance is not positive definite (smallest eigenvalue "
       << eig.eigenvalues().minCoeff() << ")";
    throw NumericalError(os.str());
  }
  const Matrix& L = llt_.matrixLLT();
  double half_log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) half_log_det += std::log(L(i, i));
  log_norm_ = -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) - half_log_det;
}

double ComponentDensity::raw_logpdf(const Vector& x) const {
  if (x.size() != mean_.size()) {
    throw InputError("observation dimension " + std::to_string(x.size()) +
                     " != component dimension " + std::to_string(mean_.size()));
  }
  const Vector z = llt_.matrixL().solve(x - mean_);
  return log_norm_ - 0.5 * z.squaredNorm();
}

double multinormal_logpdf(const Vector& x, const GaussianComponent& comp) {
  return clamp_log(ComponentDensity(comp).raw_logpdf(x));
}

MixtureDensity::MixtureDensity(const GaussianMixture& gm) {
  if (gm.size() < 1 || gm.weights.size() != gm.size()) {
    throw InputError("mixture needs one weight per component and at least one component");
  }
  log_weights_.reserve(static_cast<std::size_t>(gm.size()));
  components_.reserve(static_cast<std::size_t>(gm.size()));
  for (int k = 0; k < gm.size(); ++k) {
    log_weights_.push_back(std::log(gm.weights(k)));
    components_.emplace_back(gm.components[static_cast<std::size_t>(k)]);
    if (components_.back().dim() != components_.front().dim()) {
      throw InputError("mixture components disagree on dimension");
    }
  }
}

double MixtureDensity::log_terms(const Vector& x, std::vector<double>& out) const {
  out.resize(components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    out[k] = log_weights_[k] + components_[k].raw_logpdf(x);
  }
  return clamp_log(log_sum_exp(out));
}

double MixtureDensity::logpdf(const Vector& x) const {
  std::vector<double> scratch;
  return log_terms(x, scratch);
}

double gm_logpdf(const Vector& x, const GaussianMixture& gm) { return MixtureDensity(gm).logpdf(x); }

MixtureMoments gm_moments(const GaussianMixture& gm) {
  if (gm.size() < 1) throw InputError("empty mixture");
  const int n = gm.dim();
  MixtureMoments mm{Vector::Zero(n), Matrix::Zero(n, n)};
  for (int k = 0; k < gm.size(); ++k) mm.mean += gm.weights(k) * gm.components[static_cast<std::size_t>(k)].mean;
  for (int k = 0; k < gm.size(); ++k) {
    const auto& c = gm.components[static_cast<std::size_t>(k)];
    const Vector d = c.mean - mm.mean;
    mm.cov += gm.weights(k) * (c.cov + d * d.transpose());
  }
  return mm;
}

double variance_floor(const ObservationSeq& o, double scale) {
  require_valid(o);
  const int n = o.dim();
  const int T = o.size();
  Vector mean = Vector::Zero(n);
  for (const auto& x : o.obs) mean += x;
  mean /= T;
  std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
  for (const auto& x : o.obs) {
    for (int i = 0; i < n; ++i) diag[static_cast<std::size_t>(i)] += (x(i) - mean(i)) * (x(i) - mean(i));
  }
  const double denom = T > 1 ? T - 1.0 : 1.0;
  for (double& d : diag) d /= denom;
  std::sort(diag.begin(), diag.end());
  const std::size_t mid = diag.size() / 2;
  const double median = diag.size() % 2 ? diag[mid] : 0.5 * (diag[mid - 1] + diag[mid]);
  return median > 0.0 ? scale * median : scale;
}

Matrix floor_covariance(const Matrix& cov, double floor) {
  const Matrix sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector& lambda = eig.eigenvalues();
  if (lambda.minCoeff() >= floor) return cov;
  const Vector clamped = lambda.cwiseMax(floor);
  Matrix out = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

GaussianMixture floor_mixture(GaussianMixture gm, double floor) {
  for (auto& c : gm.components) c.cov = floor_covariance(c.cov, floor);
  return gm;
}

}  // namespace gmhmm
