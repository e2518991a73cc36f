#include "gmhmm/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gmhmm {

StarvedStateError::StarvedStateError(int state, double occupancy)
    : NumericalError("starved state " + std::to_string(state + 1) + " (total occupancy " +
                     std::to_string(occupancy) +
                     "); re-initialize the model or reduce the number of states"),
      state_(state),
      occupancy_(occupancy) {}

int GmHmm::max_components() const {
  int k = 0;
  for (const auto& gm : emissions) k = std::max(k, gm.size());
  return k;
}

ObservationSeq::ObservationSeq(std::vector<Vector> o, std::vector<std::string> l)
    : obs(std::move(o)), labels(std::move(l)) {}

ObservationSeq ObservationSeq::from_scalars(const std::vector<double>& values,
                                            std::vector<std::string> labels) {
  std::vector<Vector> obs;
  obs.reserve(values.size());
  for (double v : values) obs.push_back(Vector::Constant(1, v));
  return ObservationSeq(std::move(obs), std::move(labels));
}

std::vector<double> ObservationSeq::first_coordinate() const {
  std::vector<double> out;
  out.reserve(obs.size());
  for (const auto& v : obs) out.push_back(v(0));
  return out;
}

std::vector<int> StateSequence::one_based() const {
  std::vector<int> out(states);
  for (int& s : out) ++s;
  return out;
}

std::string Violation::message() const {
  std::ostringstream os;
  os << field << ": " << constraint << " (residual " << residual << ")";
  return os.str();
}

std::string Validation::summary() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].message();
  }
  return os.str();
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void check_probability_vector(const Vector& p, const std::string& field,
                              std::vector<Violation>& out) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double v = p(i);
    if (!std::isfinite(v) || v < -kStochasticTol || v > 1.0 + kStochasticTol) {
      out.push_back({field + "[" + std::to_string(i + 1) + "]",
                     "entry " + fmt(v) + " outside [0,1]",
                     std::isfinite(v) ? std::max(-v, v - 1.0) : v});
    }
  }
  const double sum = p.sum();
  if (!(std::abs(sum - 1.0) <= kStochasticTol)) {
    out.push_back({field, "sum " + fmt(sum) + " != 1", sum - 1.0});
  }
}

void check_component(const GaussianComponent& c, int n, const std::string& field,
                     double variance_floor, std::vector<Violation>& out) {
  if (c.mean.size() != n) {
    out.push_back({field + ".mean", "dimension " + std::to_string(c.mean.size()) +
                                        " != model dimension " + std::to_string(n),
                   static_cast<double>(c.mean.size() - n)});
    return;
  }
  if (!c.mean.allFinite()) out.push_back({field + ".mean", "non-finite entry", 0.0});
  if (c.cov.rows() != n || c.cov.cols() != n) {
    out.push_back({field + ".cov", "shape is not " + std::to_string(n) + "x" + std::to_string(n),
                   static_cast<double>(c.cov.rows() - n)});
    return;
  }
  if (!c.cov.allFinite()) {
    out.push_back({field + ".cov", "non-finite entry", 0.0});
    return;
  }
  const double asym = (c.cov - c.cov.transpose()).cwiseAbs().maxCoeff();
  if (asym > kStochasticTol) {
    out.push_back({field + ".cov", "not symmetric", asym});
    return;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(c.cov, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  if (!(lo > 0.0) || lo < variance_floor * (1.0 - 1e-12)) {
    out.push_back({field + ".cov",
                   "smallest eigenvalue " + fmt(lo) + " below floor " + fmt(variance_floor) +
                       " or not positive",
                   lo - variance_floor});
  }
}

}  // namespace

Validation validate_model(const GmHmm& m, double variance_floor) {
  Validation v;
  auto& out = v.violations;

  const auto& a = m.trans.a;
  const int R = static_cast<int>(a.rows());
  if (R < 1 || a.cols() != R) {
    out.push_back({"transition", "must be a non-empty square matrix",
                   static_cast<double>(a.cols() - a.rows())});
    return v;
  }
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < R; ++j) {
      const double x = a(i, j);
      if (!std::isfinite(x) || x < -kStochasticTol || x > 1.0 + kStochasticTol) {
        out.push_back({"transition[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]",
                       "entry " + fmt(x) + " outside [0,1]",
                       std::isfinite(x) ? std::max(-x, x - 1.0) : x});
      }
    }
    const double sum = a.row(i).sum();
    if (!(std::abs(sum - 1.0) <= kStochasticTol)) {
      out.push_back({"transition", "row " + std::to_string(i + 1) + " sum " + fmt(sum) + " != 1",
                     sum - 1.0});
    }
  }

  if (m.pi.p.size() != R) {
    out.push_back({"pi", "length " + std::to_string(m.pi.p.size()) + " != R " + std::to_string(R),
                   static_cast<double>(m.pi.p.size() - R)});
  } else {
    check_probability_vector(m.pi.p, "pi", out);
  }

  if (static_cast<int>(m.emissions.size()) != R) {
    out.push_back({"mixtures", "count " + std::to_string(m.emissions.size()) + " != R " +
                                   std::to_string(R),
                   static_cast<double>(static_cast<int>(m.emissions.size()) - R)});
    return v;
  }

  const int n = m.dim();
  if (n < 1) out.push_back({"mixtures", "dimension must be at least 1", 0.0});
  for (int j = 0; j < R; ++j) {
    const auto& gm = m.emissions[static_cast<std::size_t>(j)];
    const std::string field = "mixtures[" + std::to_string(j + 1) + "]";
    if (gm.size() < 1) {
      out.push_back({field, "needs at least one component", 0.0});
      continue;
    }
    if (gm.weights.size() != gm.size()) {
      out.push_back({field + ".weights", "length != component count",
                     static_cast<double>(gm.weights.size() - gm.size())});
    } else {
      check_probability_vector(gm.weights, field + ".weights", out);
    }
    for (int k = 0; k < gm.size(); ++k) {
      check_component(gm.components[static_cast<std::size_t>(k)], n,
                      field + ".components[" + std::to_string(k + 1) + "]", variance_floor, out);
    }
  }
  return v;
}

void require_valid(const GmHmm& m, double variance_floor) {
  const auto v = validate_model(m, variance_floor);
  if (!v.ok()) throw InputError("invalid model: " + v.summary());
}

void require_valid(const ObservationSeq& o) {
  if (o.size() < 1) throw InputError("observation sequence is empty");
  const int n = o.dim();
  if (n < 1) throw InputError("observations must have dimension at least 1");
  for (int t = 0; t < o.size(); ++t) {
    if (o[t].size() != n) {
      throw InputError("observation " + std::to_string(t + 1) + " has dimension " +
                       std::to_string(o[t].size()) + ", expected " + std::to_string(n));
    }
    if (!o[t].allFinite()) {
      throw InputError("observation " + std::to_string(t + 1) + " is not finite");
    }
  }
  if (!o.labels.empty() && static_cast<int>(o.labels.size()) != o.size()) {
    throw InputError("label count does not match observation count");
  }
}

GmHmm permute_states(const GmHmm& m, const std::vector<int>& perm) {
  const int R = m.states();
  if (static_cast<int>(perm.size()) != R) throw InputError("permutation length != R");
  GmHmm out;
  out.trans.a.resize(R, R);
  out.pi.p.resize(R);
  out.emissions.resize(static_cast<std::size_t>(R));
  for (int i = 0; i < R; ++i) {
    out.pi.p(i) = m.pi.p(perm[i]);
    out.emissions[static_cast<std::size_t>(i)] = m.emissions[static_cast<std::size_t>(perm[i])];
    for (int j = 0; j < R; ++j) out.trans.a(i, j) = m.trans.a(perm[i], perm[j]);
  }
  return out;
}

}  // namespace gmhmm
