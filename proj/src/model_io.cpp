#include "gmhmm/model_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gmhmm {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

template <typename Seq>
void write_array(std::ostringstream& os, const Seq& values) {
  os << '[';
  bool first = true;
  for (double v : values) {
    if (!first) os << ", ";
    os << format_double(v);
    first = false;
  }
  os << ']';
}

std::vector<double> row_major(const Matrix& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

std::vector<double> as_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector to_vector(const json& arr, std::size_t expected, const std::string& what) {
  if (!arr.is_array() || arr.size() != expected) {
    throw InputError("model JSON: '" + what + "' must be an array of " + std::to_string(expected) +
                     " numbers");
  }
  Vector v(static_cast<Eigen::Index>(expected));
  for (std::size_t i = 0; i < expected; ++i) {
    if (!arr[i].is_number()) throw InputError("model JSON: '" + what + "' has a non-number");
    v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  }
  return v;
}

Matrix to_matrix(const json& arr, int rows, int cols, const std::string& what) {
  const Vector flat =
      to_vector(arr, static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), what);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = flat(i * cols + j);
  return m;
}

int positive_int(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number_integer() || doc[key].get<int>() < 1) {
    throw InputError(std::string("model JSON: '") + key + "' must be a positive integer");
  }
  return doc[key].get<int>();
}

}  // namespace

std::string model_to_json(const GmHmm& m) {
  require_valid(m);
  const int K = m.max_components();
  for (const auto& gm : m.emissions) {
    if (gm.size() != K) throw InputError("model JSON requires the same K in every state");
  }
  std::ostringstream os;
  os << "{\n";
  os << "  \"R\": " << m.states() << ",\n";
  os << "  \"n\": " << m.dim() << ",\n";
  os << "  \"K\": " << K << ",\n";
  os << "  \"transition\": ";
  write_array(os, row_major(m.trans.a));
  os << ",\n  \"pi\": ";
  write_array(os, as_vec(m.pi.p));
  os << ",\n  \"mixtures\": [";
  for (std::size_t j = 0; j < m.emissions.size(); ++j) {
    const auto& gm = m.emissions[j];
    os << (j ? ",\n" : "\n") << "    {\n      \"weights\": ";
    write_array(os, as_vec(gm.weights));
    os << ",\n      \"means\": [";
    for (std::size_t k = 0; k < gm.components.size(); ++k) {
      if (k) os << ", ";
      write_array(os, as_vec(gm.components[k].mean));
    }
    os << "],\n      \"covs\": [";
    for (std::size_t k = 0; k < gm.components.size(); ++k) {
      if (k) os << ", ";
      write_array(os, row_major(gm.components[k].cov));
    }
    os << "]\n    }";
  }
  os << "\n  ]\n}\n";
  return os.str();
}

GmHmm model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("model JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("model JSON: top level must be an object");
  const int R = positive_int(doc, "R");
  const int n = positive_int(doc, "n");
  const int K = positive_int(doc, "K");

  GmHmm m;
  m.trans.a = to_matrix(doc.value("transition", json()), R, R, "transition");
  m.pi.p = to_vector(doc.value("pi", json()), static_cast<std::size_t>(R), "pi");

  const json& mixtures = doc.value("mixtures", json());
  if (!mixtures.is_array() || static_cast<int>(mixtures.size()) != R) {
    throw InputError("model JSON: 'mixtures' must hold R entries");
  }
  for (int j = 0; j < R; ++j) {
    const json& mj = mixtures[static_cast<std::size_t>(j)];
    const std::string where = "mixtures[" + std::to_string(j) + "]";
    GaussianMixture gm;
    gm.weights = to_vector(mj.value("weights", json()), static_cast<std::size_t>(K),
                           where + ".weights");
    const json& means = mj.value("means", json());
    const json& covs = mj.value("covs", json());
    if (!means.is_array() || static_cast<int>(means.size()) != K || !covs.is_array() ||
        static_cast<int>(covs.size()) != K) {
      throw InputError("model JSON: " + where + " needs K means and K covs");
    }
    for (int k = 0; k < K; ++k) {
      const auto idx = static_cast<std::size_t>(k);
      gm.components.push_back(
          {to_vector(means[idx], static_cast<std::size_t>(n), where + ".means"),
           to_matrix(covs[idx], n, n, where + ".covs")});
    }
    m.emissions.push_back(std::move(gm));
  }
  require_valid(m);
  return m;
}

void save_model(const GmHmm& m, const std::filesystem::path& path) {
  const std::string text = model_to_json(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

GmHmm load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace gmhmm
