#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "json.hpp"

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string &args) {
  const std::string cmd = std::string(CONEPROJ_CLI) + " " + args + " 2>/dev/null";
  FILE *pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t got = fread(buf, 1, sizeof buf, pipe))
    out.append(buf, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

const std::string data = CONEPROJ_DATA;

} // namespace

TEST(Cli, ProjectOrthant) {
  const auto r = run("project --p 2 --cone " + data + "/orthant3.json --point \"[1,-1,0]\"");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["point"], nlohmann::json::parse("[1.0, 0.0, 0.0]"));
}

TEST(Cli, ProjectDiagonalSubspace) {
  const auto r = run("project --p 3 --subspace " + data + "/diag3.json --point \"[1,0,0]\"");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(j["point"][i].get<double>(), 0.41421356237309505, 1e-9);
}

TEST(Cli, MalformedInputExitsOne) {
  const std::string bad = ::testing::TempDir() + "bad_cone.json";
  std::ofstream(bad) << R"({"generators": [[1, 0, 0], [0, 1]]})";
  EXPECT_EQ(run("project --p 2 --cone " + bad + " --point \"[1,2,3]\"").code, 1);
  std::ofstream(bad) << "{not json";
  EXPECT_EQ(run("project --p 2 --cone " + bad + " --point \"[1,2,3]\"").code, 1);
  EXPECT_EQ(run("project --p 2 --cone " + data + "/orthant3.json --point \"[1,2]\"").code, 1);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("polar --p 2 --cone " + data + "/orthant3.json --samples 0 --seed 1").code, 1);
  EXPECT_EQ(run("verify --suite moreau --p 3").code, 1);
  EXPECT_EQ(run("verify --suite nonsense --p 3").code, 1);
  EXPECT_EQ(run("counterexample --target nonconvex-polar --p 2 --n 3").code, 1);
  EXPECT_EQ(run("verify --suite projhyp --p 3 --n 4 --seed 7").code, 0);
  EXPECT_EQ(run("verify --suite eloz --p 3 --n 2").code, 1);
  EXPECT_EQ(run("verify --suite eloz --p 3 --n 2 --allow-low-dim").code, 0);
  EXPECT_EQ(run("counterexample --target nonlinear-subspace --p 3 --n 3 --seed 0").code, 0);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, HelpDocumentsExitCodes) {
  const auto r = run("--help");
  for (const char *code : {"0  success", "1  input error", "2  solver failure", "3  suite failure", "4  search budget"})
    EXPECT_NE(r.out.find(code), std::string::npos) << code;
}

TEST(Cli, PolarOrthantHilbert) {
  const auto r = run("polar --p 2 --cone " + data + "/orthant3.json --samples 100 --seed 3");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["convexity"]["verdict"], "no-violation-found");
  ASSERT_FALSE(j["samples"].empty());
  for (const auto &s : j["samples"])
    for (const auto &v : s["direction"])
      EXPECT_LE(v.get<double>(), 1e-12);
}

TEST(Cli, PolarRandomConeL3HasWitness) {
  const auto r = run("polar --p 3 --n 3 --random-cone --samples 20 --seed 0");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["convexity"]["verdict"], "nonconvex-with-witness");
}

TEST(Cli, CsvExport) {
  const std::string csv = ::testing::TempDir() + "samples.csv";
  ASSERT_EQ(run("polar --p 3 --cone " + data + "/orthant3.json --samples 10 --seed 1 --csv " + csv).code, 0);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "x0,x1,x2,residual_norm,dual_certified");
}

TEST(Cli, OutFileMatchesStdout) {
  const std::string out = ::testing::TempDir() + "report.json";
  const auto r = run("verify --suite lpt --p 3 --n 3 --seed 4 --out " + out);
  ASSERT_EQ(r.code, 0);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), run("verify --suite lpt --p 3 --n 3 --seed 4").out);
}
