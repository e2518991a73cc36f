#pragma once

// JSON model documents.
//
//   {
//     "R": 2, "n": 1, "K": 2,
//     "transition": [a11, a12, a21, a22],          // row-major
//     "pi": [p1, p2],
//     "mixtures": [
//       {"weights": [c1, c2],
//        "means": [[u1...], [u2...]],               // K vectors of length n
//        "covs":  [[s11, s12, ...], [...]]}         // K row-major n*n blocks
//     ]
//   }
//
// Numbers are written with 17 significant digits so that a write/read
// cycle reproduces every double exactly.

#include <filesystem>
#include <string>

#include "gmhmm/core.hpp"

namespace gmhmm {

std::string model_to_json(const GmHmm& m);
GmHmm model_from_json(const std::string& text);

void save_model(const GmHmm& m, const std::filesystem::path& path);
GmHmm load_model(const std::filesystem::path& path);

/// printf("%.17g") of a double; shared by every text writer in the project.
std::string format_double(double v);

}  // namespace gmhmm
