#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "../tools/commands.hpp"
#include "gmhmm/data.hpp"
#include "gmhmm/density.hpp"
#include "gmhmm/model_io.hpp"
#include "oracle.hpp"

namespace gmhmm {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gmhmm");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gmhmm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string sub(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const std::string kInSample = oracle::data_path("sp500_annual_returns_1976_1996.csv");
const std::string kOutOfSample = oracle::data_path("sp500_annual_returns_1997_2007.csv");
const std::string kModel = oracle::data_path("sp500_calibrated_model.json");

std::vector<int> regimes_from_decode(const fs::path& csv) {
  std::istringstream in(slurp(csv));
  std::string line;
  std::getline(in, line);
  std::vector<int> out;
  while (std::getline(in, line)) {
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    out.push_back(std::stoi(line.substr(a + 1, b - a - 1)));
  }
  return out;
}

TEST_F(CliTest, CalibrateWritesArtifacts) {
  const CliRun r = run_cli({"calibrate", kInSample, "--out-dir", sub("a")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Viterbi regimes:"), std::string::npos);
  const auto report = nlohmann::json::parse(slurp(dir_ / "a" / "fit_report.json"));
  const auto trace = report["loglik_trace"].get<std::vector<double>>();
  for (std::size_t k = 1; k < trace.size(); ++k) EXPECT_GE(trace[k], trace[k - 1] - 1e-8);
  const auto man = nlohmann::json::parse(slurp(dir_ / "a" / "manifest.json"));
  EXPECT_EQ(man["command"], "calibrate");
  EXPECT_TRUE(man.contains("tool_version"));
  EXPECT_TRUE(man.contains("wall_clock_seconds"));
  EXPECT_NO_THROW(load_model(dir_ / "a" / "model.json"));
}

TEST_F(CliTest, CalibrateSingleRegimeGivesSampleMoments) {
  const CliRun r = run_cli({"calibrate", kInSample, "--states", "1", "--mixtures", "1", "--out-dir", sub("one")});
  ASSERT_EQ(r.code, 0) << r.err;
  const GmHmm m = load_model(dir_ / "one" / "model.json");
  const auto x = load_returns_csv(kInSample).first_coordinate();
  double mean = 0.0, var = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  EXPECT_NEAR(m.emissions[0].components[0].mean(0), mean, 1e-12);
  EXPECT_NEAR(m.emissions[0].components[0].cov(0, 0), var, 1e-12);
}

TEST_F(CliTest, CalibrateIsByteReproducible) {
  for (const char* d : {"x", "y"}) {
    ASSERT_EQ(run_cli({"calibrate", kInSample, "--seed", "7", "--restarts", "2", "--out-dir", sub(d)}).code, 0);
  }
  EXPECT_EQ(slurp(dir_ / "x" / "model.json"), slurp(dir_ / "y" / "model.json"));
  EXPECT_EQ(slurp(dir_ / "x" / "fit_report.json"), slurp(dir_ / "y" / "fit_report.json"));
}

TEST_F(CliTest, DecodeShippedSeries) {
  ASSERT_EQ(run_cli({"decode", "--model", kModel, kInSample, "--out-dir", sub("in")}).code, 0);
  EXPECT_EQ(regimes_from_decode(dir_ / "in" / "decode.csv"), oracle::kInSampleRegimes);
  ASSERT_EQ(run_cli({"decode", "--model", kModel, kOutOfSample, "--initial", "stationary", "--out-dir", sub("out")}).code, 0);
  EXPECT_EQ(regimes_from_decode(dir_ / "out" / "decode.csv"), oracle::kOutOfSampleRegimes);
}

TEST_F(CliTest, SimulatedReturnsReload) {
  const CliRun r = run_cli({"simulate", "--model", kModel, "--length", "250", "--seed", "3", "--out-dir", sub("s")});
  ASSERT_EQ(r.code, 0) << r.err;
  const ObservationSeq o = load_returns_csv(dir_ / "s" / "simulated_returns.csv");
  EXPECT_EQ(o.size(), 250);
  EXPECT_TRUE(fs::exists(dir_ / "s" / "simulated_states.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "s" / "manifest.json"));
}

TEST_F(CliTest, CompareReportsEquivalence) {
  const CliRun r = run_cli({"compare", kInSample, "--out-dir", sub("c")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = nlohmann::json::parse(slurp(dir_ / "c" / "compare_report.json"));
  EXPECT_LT(rep["equivalence"]["abs_difference"].get<double>(), 1e-9);
}

TEST_F(CliTest, InputErrorsExitWithTwo) {
  std::ofstream(dir_ / "empty.csv").close();
  const CliRun r = run_cli({"compare", sub("empty.csv"), "--out-dir", sub("e")});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run_cli({"decode", "--model", sub("missing.json"), kInSample}).code, 2);
  EXPECT_NE(run_cli({"bogus"}).code, 0);
}

TEST_F(CliTest, ConstantSeriesIsHeldUpByVarianceFloor) {
  {
    std::ofstream f(dir_ / "flat.csv");
    f << "date,log_return\n";
    for (int i = 1; i <= 6; ++i) f << i << ",0.01\n";
  }
  const CliRun r = run_cli({"calibrate", sub("flat.csv"), "--states", "3", "--mixtures", "1", "--out-dir", sub("f")});
  ASSERT_EQ(r.code, 0) << r.err;
  const GmHmm m = load_model(dir_ / "f" / "model.json");
  for (const auto& gm : m.emissions) EXPECT_GT(gm.components[0].cov(0, 0), 0.0);
}

}  // namespace
}  // namespace gmhmm
