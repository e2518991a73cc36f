#pragma once

// Seeded simulation from a GmHmm.
//
// Random numbers come from a counter-based generator:
//
//   mix(z)   = SplitMix64 finalizer
//              z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//              z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31
//   key      = mix(seed ^ mix(stream * 0x9E3779B97F4A7C15 + 0xD1B54A32D192ED03))
//   draw(i)  = mix(key + (i + 1) * 0x9E3779B97F4A7C15)      i = 0, 1, 2, ...
//   uniform  = (draw >> 11) * 2^-53                          in [0, 1)
//   normals  = Box-Muller pairs from u1 = 1 - uniform, u2 = uniform:
//              sqrt(-2 ln u1) * (cos(2 pi u2), sin(2 pi u2))
//
// simulate() uses stream 0 for the regime path (draw t picks q_{t+1}) and
// stream t + 1 for the emission at step t (one uniform picks the mixture
// component, then n normals are mapped through the Cholesky factor of the
// component covariance). Output is bit-identical for a given seed.

#include <cstdint>

#include "gmhmm/core.hpp"

namespace gmhmm {

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform();
  double normal();
  /// Index drawn from a discrete distribution (weights need not be normalized).
  int categorical(const Vector& weights);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct SimOutput {
  StateSequence states;
  ObservationSeq obs;
  std::uint64_t seed = 0;
};

/// Throws InputError for an invalid model or T < 1.
SimOutput simulate(const GmHmm& m, int T, std::uint64_t seed);

}  // namespace gmhmm
