#include "gmhmm/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "gmhmm/model_io.hpp"

namespace gmhmm {

namespace {

std::string where(const std::string& source, int line, int column) {
  return source + ":" + std::to_string(line) + ": column " + std::to_string(column);
}

std::vector<std::string> split_row(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_number(const std::string& cell, const std::string& source, int line, int column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw InputError(where(source, line, column) + ": '" + cell + "' is not a number");
  }
  return v;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;
};

Table read_table(std::istream& in, const std::string& source) {
  Table tab;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_row(line);
    if (tab.header.empty()) {
      tab.header = std::move(cells);
      continue;
    }
    if (cells.size() != tab.header.size()) {
      throw InputError(where(source, lineno, static_cast<int>(std::min(cells.size(), tab.header.size())) + 1) +
                       ": expected " + std::to_string(tab.header.size()) + " fields, found " +
                       std::to_string(cells.size()));
    }
    tab.rows.push_back(std::move(cells));
    tab.line_numbers.push_back(lineno);
  }
  if (tab.header.empty()) throw InputError(source + ": empty file (missing header)");
  return tab;
}

bool all_digits(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

// Integer labels (years, step numbers) compare numerically, anything else
// lexicographically, which orders ISO-8601 dates correctly.
bool label_before(const std::string& a, const std::string& b) {
  if (all_digits(a) && all_digits(b)) {
    const auto a0 = a.find_first_not_of('0');
    const auto b0 = b.find_first_not_of('0');
    const std::string as = a0 == std::string::npos ? "0" : a.substr(a0);
    const std::string bs = b0 == std::string::npos ? "0" : b.substr(b0);
    return as.size() != bs.size() ? as.size() < bs.size() : as < bs;
  }
  return a < b;
}

void check_dates(const Table& tab, const std::string& source) {
  std::set<std::string> seen;
  for (std::size_t r = 0; r < tab.rows.size(); ++r) {
    const std::string& d = tab.rows[r][0];
    const int line = tab.line_numbers[r];
    if (d.empty()) throw InputError(where(source, line, 1) + ": empty date");
    if (!seen.insert(d).second) throw InputError(where(source, line, 1) + ": duplicate date '" + d + "'");
    if (r > 0 && !label_before(tab.rows[r - 1][0], d)) {
      throw InputError(where(source, line, 1) + ": date '" + d + "' is not after '" +
                       tab.rows[r - 1][0] + "'");
    }
  }
}

}  // namespace

PriceSeries read_price_csv(std::istream& in, const std::string& source) {
  const Table tab = read_table(in, source);
  if (tab.header.size() != 2 || tab.header[0] != "date" || tab.header[1] != "price") {
    throw InputError(source + ": expected header 'date,price'");
  }
  check_dates(tab, source);
  PriceSeries p;
  for (std::size_t r = 0; r < tab.rows.size(); ++r) {
    const double v = parse_number(tab.rows[r][1], source, tab.line_numbers[r], 2);
    if (!(v > 0.0)) {
      throw InputError(where(source, tab.line_numbers[r], 2) + ": price " + tab.rows[r][1] +
                       " must be positive");
    }
    p.dates.push_back(tab.rows[r][0]);
    p.prices.push_back(v);
  }
  return p;
}

PriceSeries load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_price_csv(in, path.string());
}

ObservationSeq read_returns_csv(std::istream& in, const std::string& source) {
  const Table tab = read_table(in, source);
  const auto& h = tab.header;
  const bool scalar = h.size() == 2 && h[0] == "date" && h[1] == "log_return";
  bool vector = h.size() >= 2 && h[0] == "date";
  for (std::size_t i = 1; vector && i < h.size(); ++i) vector = h[i] == "r" + std::to_string(i);
  if (!scalar && !vector) {
    throw InputError(source + ": expected header 'date,log_return' or 'date,r1,...,rn'");
  }
  if (tab.rows.empty()) throw InputError(source + ": no observations");
  check_dates(tab, source);

  const auto n = static_cast<Eigen::Index>(h.size() - 1);
  ObservationSeq o;
  for (std::size_t r = 0; r < tab.rows.size(); ++r) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i) = parse_number(tab.rows[r][static_cast<std::size_t>(i + 1)], source, tab.line_numbers[r],
                          static_cast<int>(i) + 2);
    }
    o.obs.push_back(std::move(x));
    o.labels.push_back(tab.rows[r][0]);
  }
  return o;
}

ObservationSeq load_returns_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_returns_csv(in, path.string());
}

ObservationSeq to_log_returns(const PriceSeries& p, int stride) {
  if (stride < 1) throw InputError("stride must be at least 1");
  if (p.size() < stride + 1) {
    throw InputError("need at least " + std::to_string(stride + 1) + " prices, have " +
                     std::to_string(p.size()));
  }
  for (int i = 0; i < p.size(); ++i) {
    if (!(p.prices[static_cast<std::size_t>(i)] > 0.0)) {
      throw InputError("price at row " + std::to_string(i + 1) + " is not positive");
    }
  }
  ObservationSeq o;
  for (int start = 0; start + stride < p.size(); start += stride) {
    const double r = std::log(p.prices[static_cast<std::size_t>(start + stride)] /
                              p.prices[static_cast<std::size_t>(start)]);
    o.obs.push_back(Vector::Constant(1, r));
    o.labels.push_back(p.dates[static_cast<std::size_t>(start)]);
  }
  return o;
}

void write_returns_csv(std::ostream& out, const ObservationSeq& o) {
  require_valid(o);
  const int n = o.dim();
  out << "date";
  if (n == 1) {
    out << ",log_return";
  } else {
    for (int i = 1; i <= n; ++i) out << ",r" << i;
  }
  out << '\n';
  for (int t = 0; t < o.size(); ++t) {
    out << (o.labels.empty() ? std::to_string(t + 1) : o.labels[static_cast<std::size_t>(t)]);
    for (int i = 0; i < n; ++i) out << ',' << format_double(o[t](i));
    out << '\n';
  }
}

void save_returns_csv(const std::filesystem::path& path, const ObservationSeq& o) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_returns_csv(out, o);
}

}  // namespace gmhmm
