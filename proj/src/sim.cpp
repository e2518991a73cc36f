#include "gmhmm/sim.hpp"

#include <cmath>
#include <numbers>

namespace gmhmm {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix(seed ^ mix(stream * kGolden + 0xD1B54A32D192ED03ULL))) {}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix(key_ + counter_ * kGolden);
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

int CounterRng::categorical(const Vector& weights) {
  const double u = uniform() * weights.sum();
  double acc = 0.0;
  int last_positive = 0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += weights(i);
    if (u < acc) return static_cast<int>(i);
  }
  return last_positive;
}

SimOutput simulate(const GmHmm& m, int T, std::uint64_t seed) {
  require_valid(m);
  if (T < 1) throw InputError("simulate: T must be at least 1");
  const int R = m.states();
  const int n = m.dim();

  // Cholesky factors, one per (state, component).
  std::vector<std::vector<Matrix>> chol(static_cast<std::size_t>(R));
  for (int j = 0; j < R; ++j) {
    for (const auto& c : m.emissions[static_cast<std::size_t>(j)].components) {
      Eigen::LLT<Matrix> llt(c.cov);
      if (llt.info() != Eigen::Success) throw NumericalError("simulate: covariance not PD");
      chol[static_cast<std::size_t>(j)].push_back(llt.matrixL());
    }
  }

  SimOutput out;
  out.seed = seed;
  out.states.states.resize(static_cast<std::size_t>(T));
  out.obs.obs.reserve(static_cast<std::size_t>(T));

  CounterRng path_rng(seed, 0);
  int q = path_rng.categorical(m.pi.p);
  for (int t = 0; t < T; ++t) {
    if (t > 0) q = path_rng.categorical(m.trans.a.row(q).transpose());
    out.states.states[static_cast<std::size_t>(t)] = q;

    CounterRng emit_rng(seed, static_cast<std::uint64_t>(t) + 1);
    const auto& gm = m.emissions[static_cast<std::size_t>(q)];
    const int k = emit_rng.categorical(gm.weights);
    Vector z(n);
    for (int i = 0; i < n; ++i) z(i) = emit_rng.normal();
    const auto& comp = gm.components[static_cast<std::size_t>(k)];
    out.obs.obs.push_back(comp.mean + chol[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)] * z);
  }
  return out;
}

}  // namespace gmhmm
