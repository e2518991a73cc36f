#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "gmhmm/baumwelch.hpp"
#include "gmhmm/data.hpp"
#include "gmhmm/density.hpp"
#include "gmhmm/hamilton.hpp"
#include "gmhmm/inference.hpp"
#include "gmhmm/model_io.hpp"
#include "gmhmm/sim.hpp"

namespace gmhmm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kModelFile = "model.json";
constexpr const char* kFitReportFile = "fit_report.json";
constexpr const char* kDecodeFile = "decode.csv";
constexpr const char* kSimReturnsFile = "simulated_returns.csv";
constexpr const char* kSimStatesFile = "simulated_states.csv";
constexpr const char* kCompareFile = "compare_report.json";
constexpr const char* kManifestFile = "manifest.json";

std::string pct(double v, int prec = 1) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << 100.0 * v;
  return os.str();
}

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << text;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
}

class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args)
      : start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["arguments"] = args;
    doc_["tool_version"] = GMHMM_VERSION;
    doc_["inputs"] = json::object();
    doc_["config"] = json::object();
    doc_["outputs"] = json::array();
  }

  json& operator[](const char* key) { return doc_[key]; }

  void write(const fs::path& dir) {
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_);
    doc_["wall_clock_seconds"] = elapsed.count();
    write_text(dir / kManifestFile, doc_.dump(2) + "\n");
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

json model_summary(const GmHmm& m) { return json::parse(model_to_json(m)); }

std::vector<std::string> mixture_rows(const GmHmm& m, const std::function<std::string(const GaussianComponent&, int)>& cell,
                                      int k, int coord) {
  std::vector<std::string> row;
  for (const auto& gm : m.emissions) {
    row.push_back(k < gm.size() ? cell(gm.components[static_cast<std::size_t>(k)], coord) : "-");
  }
  return row;
}

void print_row(std::ostream& out, const std::string& head, const std::vector<std::string>& cells) {
  out << "  " << std::left << std::setw(12) << head;
  for (const auto& c : cells) out << std::right << std::setw(10) << c;
  out << '\n';
}

// --- calibrate ------------------------------------------------------------

struct CalibrateArgs {
  std::string returns;
  int states = 2;
  int mixtures = 2;
  std::uint64_t seed = 0;
  int max_iters = 500;
  double tol = 1e-7;
  int restarts = 0;
  int threads = 1;
  std::string out_dir = ".";
};

int calibrate(const CalibrateArgs& a, const std::vector<std::string>& raw, std::ostream& out,
              std::ostream& err) {
  if (a.states < 1 || a.mixtures < 1) throw InputError("--states and --mixtures must be >= 1");
  const ObservationSeq o = load_returns_csv(a.returns);
  FitConfig cfg;
  cfg.max_iters = a.max_iters;
  cfg.rel_tol = a.tol;
  cfg.seed = a.seed;
  cfg.restarts = a.restarts;
  cfg.threads = a.threads;
  cfg.validate();

  const double floor = variance_floor(o, cfg.variance_floor_scale);
  std::vector<std::string> warnings;
  const GmHmm init = initial_model(o, a.states, a.mixtures, floor, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';

  const FitReport rep = fit_multistart(o, init, cfg);

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  save_model(rep.model, dir / kModelFile);
  json report = {
      {"iterations", rep.iterations},
      {"converged", rep.converged},
      {"restart", rep.restart},
      {"variance_floor", rep.variance_floor},
      {"final_loglik", rep.final_loglik()},
      {"loglik_trace", rep.loglik_trace},
      {"initial_model", model_summary(init)},
      {"warnings", warnings},
  };
  write_text(dir / kFitReportFile, report.dump(2) + "\n");

  Manifest man("calibrate", raw);
  man["inputs"]["returns"] = a.returns;
  man["config"] = {{"states", a.states},     {"mixtures", a.mixtures}, {"max_iters", a.max_iters},
                   {"tol", a.tol},           {"restarts", a.restarts}, {"threads", a.threads},
                   {"variance_floor_scale", cfg.variance_floor_scale}};
  man["seed"] = a.seed;
  man["model_path"] = (dir / kModelFile).string();
  man["outputs"] = {(dir / kModelFile).string(), (dir / kFitReportFile).string()};
  man.write(dir);

  out << "Calibrated R=" << a.states << ", K=" << a.mixtures << " on " << o.size()
      << " observations: log-likelihood " << num(rep.final_loglik(), 10) << " after "
      << rep.iterations << " iterations (" << (rep.converged ? "converged" : "iteration limit")
      << ")\n\n";
  print_model_tables(out, rep.model);
  const DecodedPath path = viterbi(rep.model, o);
  out << "\nViterbi regimes:";
  for (int s : path.path.one_based()) out << ' ' << s;
  out << '\n';
  return kSuccess;
}

// --- decode ---------------------------------------------------------------

struct DecodeArgs {
  std::string model;
  std::string returns;
  std::string initial = "model";
  std::string out_dir = ".";
};

int decode(const DecodeArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
  GmHmm m = load_model(a.model);
  const ObservationSeq o = load_returns_csv(a.returns);
  if (a.initial == "stationary") m.pi = InitialDistribution(invariant_distribution(m.trans));
  const DecodedPath path = viterbi(m, o);

  std::ostringstream csv;
  csv << "label,regime,log_return\n";
  out << std::left << std::setw(12) << "label" << std::setw(8) << "regime" << "return (%)\n";
  for (int t = 0; t < o.size(); ++t) {
    const std::string label = o.labels.empty() ? std::to_string(t + 1) : o.labels[static_cast<std::size_t>(t)];
    const int regime = path.path.states[static_cast<std::size_t>(t)] + 1;
    csv << label << ',' << regime;
    for (int i = 0; i < o.dim(); ++i) csv << ',' << format_double(o[t](i));
    csv << '\n';
    out << std::left << std::setw(12) << label << std::setw(8) << regime << pct(o[t](0)) << '\n';
  }

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  write_text(dir / kDecodeFile, csv.str());
  Manifest man("decode", raw);
  man["inputs"] = {{"model", a.model}, {"returns", a.returns}};
  man["config"] = {{"initial", a.initial}};
  man["seed"] = nullptr;
  man["model_path"] = a.model;
  man["log_joint"] = path.log_joint;
  man["outputs"] = {(dir / kDecodeFile).string()};
  man.write(dir);
  return kSuccess;
}

// --- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string model;
  int length = 100;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

int simulate_cmd(const SimulateArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
  const GmHmm m = load_model(a.model);
  const SimOutput sim = simulate(m, a.length, a.seed);
  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  save_returns_csv(dir / kSimReturnsFile, sim.obs);
  std::ostringstream states;
  states << "label,regime\n";
  for (int t = 0; t < sim.states.size(); ++t) {
    states << t + 1 << ',' << sim.states.states[static_cast<std::size_t>(t)] + 1 << '\n';
  }
  write_text(dir / kSimStatesFile, states.str());

  Manifest man("simulate", raw);
  man["inputs"] = {{"model", a.model}};
  man["config"] = {{"length", a.length}};
  man["seed"] = a.seed;
  man["model_path"] = a.model;
  man["outputs"] = {(dir / kSimReturnsFile).string(), (dir / kSimStatesFile).string()};
  man.write(dir);

  out << "Simulated " << a.length << " steps (seed " << a.seed << ") into " << dir.string() << '\n';
  return kSuccess;
}

// --- compare --------------------------------------------------------------

struct CompareArgs {
  std::string returns;
  std::uint64_t seed = 0;
  int max_iters = 500;
  double tol = 1e-7;
  int starts = 5;
  std::string out_dir = ".";
};

json theta_json(const HamiltonTheta& th) {
  return {{"u1", th.u1}, {"u2", th.u2}, {"phi1", th.phi1}, {"phi2", th.phi2}, {"a12", th.a12}, {"a21", th.a21}};
}

int compare(const CompareArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
  const ObservationSeq o = load_returns_csv(a.returns);
  if (o.dim() != 1) throw InputError("compare needs scalar returns");

  FitConfig cfg;
  cfg.max_iters = a.max_iters;
  cfg.rel_tol = a.tol;
  cfg.seed = a.seed;
  cfg.validate();
  const double floor = variance_floor(o, cfg.variance_floor_scale);
  const GmHmm init = initial_model(o, 2, 1, floor);
  const FitReport bw = fit(o, init, cfg);

  HamiltonFitConfig hcfg;
  hcfg.seed = a.seed;
  hcfg.n_starts = a.starts;
  hcfg.variance_floor = floor;
  const HamiltonTheta theta0 = theta_from_model(init);
  const HamiltonFit ham = hamilton_fit(o, theta0, hcfg);

  // The Hamilton recursion is the forward pass started at eta.
  const HamiltonTheta bw_theta = theta_from_model(bw.model);
  GmHmm bw_stationary = bw.model;
  bw_stationary.pi = InitialDistribution(invariant_distribution(bw.model.trans));
  const double ham_at_bw = hamilton_loglik(bw_theta, o);
  const double fwd_at_bw = loglikelihood(bw_stationary, o);
  const Vector eta_bw = bw_stationary.pi.p;
  const Vector eta_ham = invariant_distribution(ham.theta.transition());

  json report = {
      {"observations", o.size()},
      {"baum_welch",
       {{"loglik", bw.final_loglik()},
        {"iterations", bw.iterations},
        {"converged", bw.converged},
        {"theta", theta_json(bw_theta)},
        {"pi", std::vector<double>(bw.model.pi.p.data(), bw.model.pi.p.data() + 2)},
        {"eta", std::vector<double>(eta_bw.data(), eta_bw.data() + 2)}}},
      {"hamilton",
       {{"loglik", ham.loglik},
        {"evaluations", ham.evaluations},
        {"converged", ham.converged},
        {"theta", theta_json(ham.theta)},
        {"eta", std::vector<double>(eta_ham.data(), eta_ham.data() + 2)}}},
      {"equivalence",
       {{"hamilton_loglik_at_bw_theta", ham_at_bw},
        {"forward_loglik_at_bw_theta_stationary_pi", fwd_at_bw},
        {"abs_difference", std::abs(ham_at_bw - fwd_at_bw)}}},
  };
  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  write_text(dir / kCompareFile, report.dump(2) + "\n");
  Manifest man("compare", raw);
  man["inputs"] = {{"returns", a.returns}};
  man["config"] = {{"max_iters", a.max_iters}, {"tol", a.tol}, {"starts", a.starts}};
  man["seed"] = a.seed;
  man["model_path"] = nullptr;
  man["outputs"] = {(dir / kCompareFile).string()};
  man.write(dir);

  out << "Baum-Welch (R=2, K=1) vs Hamilton filter on " << o.size() << " observations\n\n";
  print_row(out, "", {"BW", "Hamilton"});
  print_row(out, "loglik", {num(bw.final_loglik(), 7), num(ham.loglik, 7)});
  print_row(out, "u1 (%)", {pct(bw_theta.u1), pct(ham.theta.u1)});
  print_row(out, "u2 (%)", {pct(bw_theta.u2), pct(ham.theta.u2)});
  print_row(out, "sd1 (%)", {pct(std::sqrt(bw_theta.phi1)), pct(std::sqrt(ham.theta.phi1))});
  print_row(out, "sd2 (%)", {pct(std::sqrt(bw_theta.phi2)), pct(std::sqrt(ham.theta.phi2))});
  print_row(out, "a12", {num(bw_theta.a12), num(ham.theta.a12)});
  print_row(out, "a21", {num(bw_theta.a21), num(ham.theta.a21)});
  print_row(out, "eta1", {num(eta_bw(0)), num(eta_ham(0))});
  print_row(out, "pi1", {num(bw.model.pi.p(0)), "eta"});
  print_row(out, "work", {std::to_string(bw.iterations) + " it", std::to_string(ham.evaluations) + " ev"});
  out << "\nHamilton filter at the BW parameters: " << num(ham_at_bw, 12)
      << "; forward pass with pi = eta: " << num(fwd_at_bw, 12) << '\n';
  return kSuccess;
}

}  // namespace

void print_model_tables(std::ostream& out, const GmHmm& m) {
  const int R = m.states();
  const int K = m.max_components();
  std::vector<std::string> head;
  for (int j = 1; j <= R; ++j) head.push_back("state " + std::to_string(j));

  out << "Initial state probabilities (pi)\n";
  print_row(out, "", head);
  {
    std::vector<std::string> row;
    for (int j = 0; j < R; ++j) row.push_back(num(m.pi.p(j)));
    print_row(out, "pi", row);
  }

  out << "\nTransition matrix (A)\n";
  print_row(out, "", head);
  for (int i = 0; i < R; ++i) {
    std::vector<std::string> row;
    for (int j = 0; j < R; ++j) row.push_back(num(m.trans(i, j), 3));
    print_row(out, "from " + std::to_string(i + 1), row);
  }

  for (int coord = 0; coord < m.dim(); ++coord) {
    const std::string suffix = m.dim() > 1 ? " [coordinate " + std::to_string(coord + 1) + "]" : "";
    out << "\nMixture means u_jk (%/year)" << suffix << '\n';
    print_row(out, "", head);
    for (int k = 0; k < K; ++k) {
      print_row(out, "N" + std::to_string(k + 1),
                mixture_rows(m, [](const GaussianComponent& c, int i) { return pct(c.mean(i)); }, k, coord));
    }
    std::vector<std::string> overall_mean, overall_sd;
    for (const auto& gm : m.emissions) {
      const auto mm = gm_moments(gm);
      overall_mean.push_back(pct(mm.mean(coord)));
      overall_sd.push_back(pct(std::sqrt(mm.cov(coord, coord))));
    }
    print_row(out, "Overall", overall_mean);

    out << "\nMixture standard deviations (%/year)" << suffix << '\n';
    print_row(out, "", head);
    for (int k = 0; k < K; ++k) {
      print_row(out, "N" + std::to_string(k + 1),
                mixture_rows(m, [](const GaussianComponent& c, int i) { return pct(std::sqrt(c.cov(i, i))); },
                             k, coord));
    }
    print_row(out, "Overall", overall_sd);
  }

  out << "\nMixture weights c_jk\n";
  print_row(out, "", head);
  for (int k = 0; k < K; ++k) {
    std::vector<std::string> row;
    for (const auto& gm : m.emissions) row.push_back(k < gm.size() ? num(gm.weights(k), 3) : "-");
    print_row(out, "N" + std::to_string(k + 1), row);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regime-switching Gaussian-mixture HMM calibration", "gmhmm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GMHMM_VERSION);

  CalibrateArgs ca;
  auto* cal = app.add_subcommand("calibrate", "Fit a GM-HMM to a returns file by Baum-Welch");
  cal->add_option("returns", ca.returns, "Returns CSV (date,log_return)")->required();
  cal->add_option("--states", ca.states, "Number of regimes R")->capture_default_str();
  cal->add_option("--mixtures", ca.mixtures, "Gaussian components per regime K")->capture_default_str();
  cal->add_option("--seed", ca.seed, "Seed for restart perturbations")->capture_default_str();
  cal->add_option("--max-iters", ca.max_iters, "EM iteration limit")->capture_default_str();
  cal->add_option("--tol", ca.tol, "Relative log-likelihood tolerance")->capture_default_str();
  cal->add_option("--restarts", ca.restarts, "Additional perturbed starts")->capture_default_str();
  cal->add_option("--threads", ca.threads, "Concurrent restarts (0 = all cores)")->capture_default_str();
  cal->add_option("--out-dir", ca.out_dir, "Output directory")->capture_default_str();

  DecodeArgs da;
  auto* dec = app.add_subcommand("decode", "Viterbi regime sequence for a returns file");
  dec->add_option("--model", da.model, "Model JSON")->required();
  dec->add_option("returns", da.returns, "Returns CSV")->required();
  dec->add_option("--initial", da.initial, "Initial regime law: model pi or stationary distribution")
      ->check(CLI::IsMember({"model", "stationary"}))
      ->capture_default_str();
  dec->add_option("--out-dir", da.out_dir, "Output directory")->capture_default_str();

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Simulate regimes and returns from a model");
  sim->add_option("--model", sa.model, "Model JSON")->required();
  sim->add_option("--length", sa.length, "Number of steps T")->required();
  sim->add_option("--seed", sa.seed, "Random seed")->capture_default_str();
  sim->add_option("--out-dir", sa.out_dir, "Output directory")->capture_default_str();

  CompareArgs pa;
  auto* cmp = app.add_subcommand("compare", "Baum-Welch (R=2, K=1) against the Hamilton filter MLE");
  cmp->add_option("returns", pa.returns, "Returns CSV")->required();
  cmp->add_option("--seed", pa.seed, "Seed for Hamilton restarts")->capture_default_str();
  cmp->add_option("--max-iters", pa.max_iters, "EM iteration limit")->capture_default_str();
  cmp->add_option("--tol", pa.tol, "Relative log-likelihood tolerance")->capture_default_str();
  cmp->add_option("--starts", pa.starts, "Simplex starts for the Hamilton fit")->capture_default_str();
  cmp->add_option("--out-dir", pa.out_dir, "Output directory")->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  try {
    if (*cal) return calibrate(ca, args, out, err);
    if (*dec) return decode(da, args, out);
    if (*sim) return simulate_cmd(sa, args, out);
    if (*cmp) return compare(pa, args, out);
  } catch (const StarvedStateError& e) {
    err << "error: " << e.what() << "\nhint: try fewer states (--states), fewer mixtures "
        << "(--mixtures), or extra starts (--restarts)\n";
    return kNumericalError;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace gmhmm::cli
