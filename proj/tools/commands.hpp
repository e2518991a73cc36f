#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gmhmm/core.hpp"

namespace gmhmm::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 2,
  kNumericalError = 3,
};

/// Entry point shared by the executable and the tests. args[0] is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parameter tables (means and stds in %/yr).
void print_model_tables(std::ostream& out, const GmHmm& m);

}  // namespace gmhmm::cli
