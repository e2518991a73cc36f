#pragma once

#include <functional>

#include "gmhmm/core.hpp"

namespace gmhmm {

struct NelderMeadOptions {
  int max_evals = 20000;
  double ftol = 1e-12;   // relative spread of simplex values
  double xtol = 1e-10;   // largest vertex distance from the best vertex
  double initial_step = 0.5;
};

struct NelderMeadResult {
  Vector x;
  double fx = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Unconstrained downhill simplex minimization. Non-finite objective
/// values are treated as +infinity.
NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                             const NelderMeadOptions& opt = {});

}  // namespace gmhmm
