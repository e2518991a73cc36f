#pragma once

// Parameter types for Gaussian-mixture hidden Markov models.
//
// Regimes are 0-based everywhere in the library. Anything written for a
// person to read (CLI tables, CSV output) shifts to 1-based.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "gmhmm/error.hpp"

namespace gmhmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Absolute tolerance for row sums, weight sums and covariance symmetry.
inline constexpr double kStochasticTol = 1e-9;

/// a(i, j) = p(q_{t+1} = j | q_t = i).
struct TransitionMatrix {
  Matrix a;

  TransitionMatrix() = default;
  explicit TransitionMatrix(Matrix m) : a(std::move(m)) {}

  int states() const { return static_cast<int>(a.rows()); }
  double operator()(int i, int j) const { return a(i, j); }
};

/// p(i) = p(q_1 = i).
struct InitialDistribution {
  Vector p;

  InitialDistribution() = default;
  explicit InitialDistribution(Vector v) : p(std::move(v)) {}

  int states() const { return static_cast<int>(p.size()); }
  double operator[](int i) const { return p(i); }
};

struct GaussianComponent {
  Vector mean;
  Matrix cov;

  int dim() const { return static_cast<int>(mean.size()); }
};

struct GaussianMixture {
  Vector weights;
  std::vector<GaussianComponent> components;

  int size() const { return static_cast<int>(components.size()); }
  int dim() const { return components.empty() ? 0 : components.front().dim(); }
};

/// Full model {A, B, pi}: one Gaussian mixture per regime.
struct GmHmm {
  TransitionMatrix trans;
  InitialDistribution pi;
  std::vector<GaussianMixture> emissions;

  int states() const { return trans.states(); }
  int dim() const { return emissions.empty() ? 0 : emissions.front().dim(); }
  /// Largest component count over regimes.
  int max_components() const;
};

/// T observation vectors of common dimension, with optional labels.
struct ObservationSeq {
  std::vector<Vector> obs;
  std::vector<std::string> labels;  // empty or one per observation

  ObservationSeq() = default;
  explicit ObservationSeq(std::vector<Vector> o, std::vector<std::string> l = {});

  /// Scalar series convenience constructor.
  static ObservationSeq from_scalars(const std::vector<double>& values,
                                     std::vector<std::string> labels = {});

  int size() const { return static_cast<int>(obs.size()); }
  int dim() const { return obs.empty() ? 0 : static_cast<int>(obs.front().size()); }
  const Vector& operator[](int t) const { return obs[static_cast<std::size_t>(t)]; }

  /// First coordinate of every observation.
  std::vector<double> first_coordinate() const;
};

/// Regime path, 0-based.
struct StateSequence {
  std::vector<int> states;

  int size() const { return static_cast<int>(states.size()); }
  /// 1-based copy for display and file output.
  std::vector<int> one_based() const;
};

struct Violation {
  std::string field;
  std::string constraint;
  double residual = 0.0;

  std::string message() const;
};

struct Validation {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/// Checks every structural invariant of the model. Never throws.
/// `variance_floor` is the smallest eigenvalue a covariance may have.
Validation validate_model(const GmHmm& m, double variance_floor = 0.0);

/// Throws InputError carrying the summary when validation fails.
void require_valid(const GmHmm& m, double variance_floor = 0.0);

/// Throws InputError when the sequence is empty or ragged.
void require_valid(const ObservationSeq& o);

/// Relabels regimes: new state k is old state perm[k].
GmHmm permute_states(const GmHmm& m, const std::vector<int>& perm);

}  // namespace gmhmm
