#pragma once

// CSV ingestion of price and return series.
//
// Price files:   header `date,price`
// Return files:  header `date,log_return`, or `date,r1,...,rn` for vectors
//
// UTF-8, '.' decimal separator, LF or CRLF line endings. Returns are
// decimal fractions (0.012 is 1.2%).

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gmhmm/core.hpp"

namespace gmhmm {

struct PriceSeries {
  std::vector<std::string> dates;  // strictly increasing
  std::vector<double> prices;      // all > 0

  int size() const { return static_cast<int>(prices.size()); }
};

/// Throws InputError naming the offending line and column.
PriceSeries read_price_csv(std::istream& in, const std::string& source = "<input>");
PriceSeries load_csv(const std::filesystem::path& path);

ObservationSeq read_returns_csv(std::istream& in, const std::string& source = "<input>");
ObservationSeq load_returns_csv(const std::filesystem::path& path);

/// Log returns over non-overlapping windows of `stride` rows:
/// O_t = ln(X[(t+1)*stride] / X[t*stride]), labelled by the window start.
/// Produces floor((rows - 1) / stride) returns.
ObservationSeq to_log_returns(const PriceSeries& p, int stride = 1);

/// Writes the return schema with 17 significant digits. Missing labels
/// are replaced by 1-based step numbers.
void write_returns_csv(std::ostream& out, const ObservationSeq& o);
void save_returns_csv(const std::filesystem::path& path, const ObservationSeq& o);

}  // namespace gmhmm
