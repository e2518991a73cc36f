#pragma once

#include <stdexcept>
#include <string>

namespace gmhmm {

/// Malformed or inconsistent input: bad files, dimension mismatches,
/// parameters that violate their invariants.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure inside an estimation or density routine.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A regime received (numerically) zero posterior mass during re-estimation.
class StarvedStateError : public NumericalError {
 public:
  StarvedStateError(int state, double occupancy);

  int state() const { return state_; }
  double occupancy() const { return occupancy_; }

 private:
  int state_;
  double occupancy_;
};

}  // namespace gmhmm
