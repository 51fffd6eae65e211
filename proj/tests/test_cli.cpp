#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "qmhd/qmhd.hpp"

namespace fs = std::filesystem;
using namespace qmhd;

namespace {

const fs::path kWork = fs::temp_directory_path() / "qmhd_test_cli";

int run(const std::string& args, const std::string& tag) {
  fs::create_directories(kWork);
  const std::string cmd = std::string(QMHD_CLI_PATH) + " " + args + " > " + (kWork / (tag + ".stdout")).string() +
                          " 2> " + (kWork / (tag + ".stderr")).string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& body) {
  fs::create_directories(kWork);
  const auto p = kWork / (name + ".json");
  std::ofstream(p) << body;
  return p;
}

std::string small_solve(const std::string& out, const std::string& method, double Re) {
  std::ostringstream s;
  s << R"({"domain": {"n": 6}, "params": {"Re": )" << Re
    << R"(, "Rm": 1.0, "mu0": 1.0}, "forcing": {"type": "manufactured", "amplitude": 1.0},)"
    << R"( "solver": {"method": ")" << method << R"("}, "constants": {"samples": 10}, "output": ")" << out
    << R"(", "seed": 3})";
  return s.str();
}

std::map<std::string, double> read_constants_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::map<std::string, double> out;
  while (std::getline(in, line)) {
    const auto a = line.find(','), b = line.rfind(',');
    out[line.substr(0, a)] = std::stod(line.substr(a + 1, b - a - 1));
  }
  return out;
}

}  // namespace

TEST(Cli, MissingConfigFails) {
  EXPECT_NE(run("solve --config /nonexistent/config.json", "missing"), 0);
  EXPECT_NE(slurp(kWork / "missing.stderr").find("cannot open config"), std::string::npos);
}

TEST(Cli, UnknownKeyRejected) {
  const auto cfg = write_config("typo", R"({"domian": {"n": 4}})");
  EXPECT_EQ(run("verify --config " + cfg.string(), "typo"), 1);
  EXPECT_NE(slurp(kWork / "typo.stderr").find("domian"), std::string::npos);
}

TEST(Cli, DefaultsPrinted) {
  EXPECT_EQ(run("defaults", "defaults"), 0);
  EXPECT_NE(slurp(kWork / "defaults.stdout").find("\"exponent_mode\""), std::string::npos);
}

TEST(Cli, VerifyDegenerateGrid) {
  const auto cfg = write_config("verify2", R"({"domain": {"n": 2}, "verify": {"samples": 1}, "output": "verify2"})");
  EXPECT_EQ(run("verify --config " + cfg.string(), "verify2"), 0);
  const auto report = slurp(kWork / "verify2" / "verify_report.txt");
  EXPECT_NE(report.find("PASS bergman_P_plus_Q"), std::string::npos);
  EXPECT_EQ(report.find("FAIL"), std::string::npos);
}

TEST(Cli, SolveZeroData) {
  const auto cfg = write_config("zero", R"({"domain": {"n": 6}, "constants": {"samples": 10}, "output": "zero"})");
  ASSERT_EQ(run("solve --config " + cfg.string(), "zero"), 0);
  const auto out = kWork / "zero";
  for (const char* f : {"u.vtk", "B.vtk", "p.vtk", "u.csv", "B.csv", "p.csv", "convergence.csv", "energy.csv",
                        "constants.csv", "constants.txt", "manifest.txt", "solve.log"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  const QField u = read_vtk((out / "u.vtk").string());
  EXPECT_EQ(max_norm(u), 0.0);
  EXPECT_EQ(read_manifest((out / "manifest.txt").string()).at("converged"), "true");
}

TEST(Cli, SolveSmallDataRoundTrips) {
  const auto cfg = write_config("small", small_solve("small", "banach", 1.0));
  ASSERT_EQ(run("solve --config " + cfg.string(), "small"), 0);
  const auto out = kWork / "small";
  const QField from_vtk = read_vtk((out / "B.vtk").string());
  const QField from_csv = read_csv((out / "B.csv").string(), from_vtk.domain_ptr());
  for (std::size_t i = 0; i < from_vtk.size(); ++i) EXPECT_EQ(from_vtk[i], from_csv[i]);
  EXPECT_GT(max_norm(from_vtk), 0.0);
}

TEST(Cli, SchauderRefusalExitsTwo) {
  const auto cfg = write_config("refuse", small_solve("refuse", "schauder", 50.0));
  EXPECT_EQ(run("solve --config " + cfg.string(), "refuse"), 2);
  EXPECT_NE(slurp(kWork / "refuse.stderr").find("measured"), std::string::npos);
  const auto m = read_manifest((kWork / "refuse" / "manifest.txt").string());
  EXPECT_GE(std::stod(m.at("refused")), 1.0);
}

TEST(Cli, RepeatedSolveIsByteIdentical) {
  const auto cfg = write_config("det", small_solve("det_a", "banach", 1.0));
  ASSERT_EQ(run("solve --config " + cfg.string(), "det_a"), 0);
  ASSERT_EQ(run("solve --config " + cfg.string() + " --out " + (kWork / "det_b").string(), "det_b"), 0);
  for (const char* f : {"convergence.csv", "energy.csv", "solve.log", "u.csv", "B.csv", "p.csv", "constants.csv"})
    EXPECT_EQ(slurp(kWork / "det_a" / f), slurp(kWork / "det_b" / f)) << f;
}

TEST(Cli, ConstantsReportRecomputable) {
  const auto cfg = write_config(
      "const", R"({"domain": {"n": 6}, "params": {"Re": 2.0, "Rm": 1.5, "mu0": 0.5},
                   "constants": {"samples": 10, "budget_B_h1": 0.01}, "output": "const", "seed": 5})");
  ASSERT_EQ(run("constants --config " + cfg.string(), "const"), 0);
  auto k = read_constants_csv(kWork / "const" / "constants.csv");
  const double lam = lambda_min_analytic(*unit_cube(6));
  EXPECT_NEAR(k["C1"], 1.0 / lam, 0.01 / lam);
  const double Re = 2.0, Rm = 1.5, mu0 = 0.5;
  EXPECT_NEAR(k["cond1_threshold"], 1.0 / (2.0 * k["C1"] * k["Cs"] * Rm * Rm), 1e-12 * k["cond1_threshold"]);
  const double t2 = std::min(mu0 / (Re * Re * k["k"] * k["CD"]), 1.0 / (Rm * Rm * k["k"] * k["CD"]));
  EXPECT_NEAR(k["theorem2_threshold"], t2, 1e-12 * t2);
  // rerun gives the same file
  const auto first = slurp(kWork / "const" / "constants.csv");
  ASSERT_EQ(run("constants --config " + cfg.string(), "const2"), 0);
  EXPECT_EQ(first, slurp(kWork / "const" / "constants.csv"));
}
