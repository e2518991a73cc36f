#pragma once

#include <cstdint>
#include <vector>

#include "gmhmm/core.hpp"

namespace gmhmm {

/// Log-densities below this are clamped (exp() of anything smaller
/// underflows to zero in double precision).
inline constexpr double kLogDensityFloor = -745.0;

/// Number of clamps applied so far in this process. Diagnostic only.
std::uint64_t underflow_clamp_count();

/// Log of the n-variate normal density at x.
/// Throws InputError on dimension mismatch and NumericalError when the
/// covariance has no Cholesky factor (message names its smallest eigenvalue).
double multinormal_logpdf(const Vector& x, const GaussianComponent& comp);

/// log sum_k c_k p_k(x), evaluated with a max shift.
double gm_logpdf(const Vector& x, const GaussianMixture& gm);

struct MixtureMoments {
  Vector mean;
  Matrix cov;
};

/// Overall mean and covariance of a mixture (law of total variance).
MixtureMoments gm_moments(const GaussianMixture& gm);

/// Cholesky-factored component, reusable across many evaluations.
class ComponentDensity {
 public:
  explicit ComponentDensity(const GaussianComponent& comp);

  int dim() const { return static_cast<int>(mean_.size()); }
  /// Unclamped log-density.
  double raw_logpdf(const Vector& x) const;

 private:
  Vector mean_;
  Eigen::LLT<Matrix> llt_;
  double log_norm_ = 0.0;  // -(n/2) log(2 pi) - (1/2) log det
};

/// Factored mixture: per-component log weights plus Cholesky factors.
class MixtureDensity {
 public:
  explicit MixtureDensity(const GaussianMixture& gm);

  int size() const { return static_cast<int>(components_.size()); }
  int dim() const { return components_.front().dim(); }

  /// Fills out[k] = log(c_k) + log p_k(x) (unclamped) and returns the
  /// clamped log of their sum.
  double log_terms(const Vector& x, std::vector<double>& out) const;
  double logpdf(const Vector& x) const;

 private:
  std::vector<double> log_weights_;
  std::vector<ComponentDensity> components_;
};

/// Smallest admissible covariance eigenvalue for a data set:
/// scale * median of the diagonal of the sample covariance.
/// Falls back to `scale` itself when that median is zero.
double variance_floor(const ObservationSeq& o, double scale);

/// Raises every eigenvalue of a symmetric matrix to at least `floor`.
/// Matrices already above the floor come back unchanged.
Matrix floor_covariance(const Matrix& cov, double floor);

/// Applies floor_covariance to every component.
GaussianMixture floor_mixture(GaussianMixture gm, double floor);

}  // namespace gmhmm
