#include "cli.hpp"

#include "ctk/json_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ctk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ctk::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("ctk_cli_" + name);
  std::ofstream(p) << text;
  return p.string();
}

const char* kHopfield = R"({"type": "hopfield", "Lambda": [1, 1], "T": [[0, 1], [1, 0]],
  "activations": [{"kind": "tanh_like", "a": 0.5, "k": 1}, {"kind": "tanh_like", "a": 0.5, "k": 1}],
  "input": {"kind": "constant", "value": [0.2, 0.1]}})";

}  // namespace

TEST(Cli, MeasureCounterexampleMatrix) {
  const auto f = write_temp("stated.json", "[[-1.6857, 1.0143], [-0.4143, -0.3143]]");
  const auto r = run({"measure", f, "--p", "inf"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = ctk::Json::parse(r.out);
  EXPECT_NEAR(j["mu"].get<double>(), 0.1, 1e-12);
  EXPECT_NEAR(j["mu_plus"].get<double>(), -0.3143, 1e-12);
  EXPECT_EQ(j["seed"], 1);
}

TEST(Cli, MeasureIsDeterministic) {
  const auto f = write_temp("m.json", R"({"A": [[-1, 0.5], [1, -1]]})");
  const auto a = run({"measure", f, "--p", "3", "--oracle", "--seed", "4"});
  const auto b = run({"measure", f, "--p", "3", "--oracle", "--seed", "4"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_TRUE(ctk::Json::parse(a.out).contains("oracle"));
}

TEST(Cli, CertifyExitCodes) {
  const auto f = write_temp("lin.json", R"({"type": "linear", "A": [[-2, 1], [0.5, -1]], "domain": {"lo": [0, 0], "hi": [1, 1]}})");
  EXPECT_EQ(run({"certify", f, "--p", "inf", "--condition", "monotone.jacobian_conic_measure", "--rate", "-0.5"}).code, 0);
  const auto bad = run({"certify", f, "--p", "inf", "--condition", "monotone.jacobian_conic_measure", "--rate", "-0.6"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_TRUE(ctk::Json::parse(bad.out)["certificate"].contains("witness"));
}

TEST(Cli, InputErrorsExitTwo) {
  EXPECT_EQ(run({"measure", "/nonexistent/file.json"}).code, 2);
  const auto f = write_temp("bad.json", R"({"type": "unknown"})");
  EXPECT_EQ(run({"certify", f, "--rate", "1"}).code, 2);
  const auto g = write_temp("ragged.json", "[[1, 2], [3]]");
  EXPECT_EQ(run({"measure", g}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  const auto lin = write_temp("lin2.json", R"({"type": "linear", "A": [[-1, 0], [0, -1]]})");
  EXPECT_EQ(run({"certify", lin, "--condition", "monotone.jacobian_conic_measure"}).code, 2);
}

TEST(Cli, HopfieldReportsEquilibrium) {
  const auto f = write_temp("hop.json", kHopfield);
  const auto r = run({"hopfield", f, "--p", "inf"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = ctk::Json::parse(r.out);
  EXPECT_NEAR(j["certificate"]["c"].get<double>(), 0.5, 1e-9);
  EXPECT_LT(j["equilibrium"]["residual"].get<double>(), 1e-10);
}

TEST(Cli, SimulateCsvColumns) {
  const auto f = write_temp("hop2.json", kHopfield);
  const auto r = run({"simulate", f, "--x0", "1,0;0,1", "--horizon", "2", "--format", "csv", "--dt", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "run,t,x1,x2,norm,dini");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 10);
}

TEST(Cli, SimulatePairDistanceUnderEnvelope) {
  const auto f = write_temp("hop3.json", kHopfield);
  const auto r = run({"simulate", f, "--x0", "3,-2;-4,4", "--pair", "--rate", "-0.5", "--p", "inf"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = ctk::Json::parse(r.out);
  ASSERT_GT(j["runs"][0].size(), 10u);
  for (const auto& row : j["runs"][0])
    EXPECT_LE(row["distance"].get<double>(), row["envelope"].get<double>() * (1 + 1e-6) + 1e-9);
}

TEST(Cli, IssFalsifyFlag) {
  const auto f = write_temp("li.json", R"({"type": "linear_interconnection", "k": [1, 1], "D": [[0, 0.3], [0.3, 0]],
    "input": {"kind": "sin", "offset": [0.05, 0.05], "amplitude": [0.05, 0.05], "period": 3}})");
  EXPECT_EQ(run({"iss", f, "--p", "1", "--rate", "1.3", "--x0", "1,-0.5"}).code, 0);
  EXPECT_EQ(run({"iss", f, "--p", "1", "--rate", "2.6", "--x0", "1,-0.5"}).code, 2);
  EXPECT_EQ(run({"iss", f, "--p", "1", "--rate", "2.6", "--x0", "1,-0.5", "--falsify"}).code, 1);
}

TEST(Cli, OutFileReceivesReport) {
  const auto f = write_temp("m2.json", "[[-1, 0], [0, -2]]");
  const auto out = (fs::temp_directory_path() / "ctk_cli_out.json").string();
  const auto r = run({"measure", f, "--out", out});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(out);
  EXPECT_DOUBLE_EQ(ctk::Json::parse(in)["mu"].get<double>(), -1.0);
}
