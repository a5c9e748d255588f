// Black-box tests of the geomdyn executable.

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Result run(const std::string& args) {
  const std::string cmd = std::string(GEOMDYN_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("geomdyn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, HeavyTopRowCountAndHeader) {
  const Result r = run("simulate --model heavy-top --group se3 --dt 1e-3 --tf 8 --out " + path("ht.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const std::vector<std::string> rows = lines(slurp(path("ht.csv")));
  ASSERT_EQ(rows.size(), 8002u);  // header + 8001 samples
  EXPECT_EQ(rows[0],
            "t_s,pivot_position_residual_m,pivot_orientation_residual,kinetic_energy_J,"
            "total_energy_J");
  EXPECT_EQ(split(rows[1])[0], "0");
  EXPECT_EQ(split(rows.back())[0], "8");
  // 17 significant digits
  EXPECT_EQ(split(rows[1])[3], "0.68625000000000003");
}

TEST_F(Cli, GoldenHeaders) {
  const Result a = run("simulate --model free-body-com-translating --dt 1e-2 --tf 0.02 --out " +
                       path("a.csv"));
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(lines(slurp(path("a.csv")))[0],
            "t_s,box_rotation_error_rad,box_translation_error_m,kinetic_energy_J,total_energy_J");

  const Result b = run("simulate --model free-body-offset --dt 1e-2 --tf 0.02 --out " + path("b.csv"));
  ASSERT_EQ(b.code, 0) << b.out;
  EXPECT_EQ(lines(slurp(path("b.csv")))[0], "t_s,box_com_drift_m,kinetic_energy_J,total_energy_J");

  const Result c = run("simulate --model rp-chain --dt 1e-2 --tf 0.02 --out " + path("c.csv"));
  ASSERT_EQ(c.code, 0) << c.out;
  EXPECT_EQ(lines(slurp(path("c.csv")))[0],
            "t_s,joint1_position_residual_m,joint1_orientation_residual,"
            "joint2_position_residual_m,joint2_orientation_residual,kinetic_energy_J,"
            "total_energy_J");
}

TEST_F(Cli, ByteIdenticalReruns) {
  const std::string args = "simulate --model double-pendulum --group so3xr3 --dt 1e-2 --tf 1 --out ";
  ASSERT_EQ(run(args + path("1.csv")).code, 0);
  ASSERT_EQ(run(args + path("2.csv")).code, 0);
  EXPECT_EQ(slurp(path("1.csv")), slurp(path("2.csv")));
}

TEST_F(Cli, FreeBodyComColumnIsZero) {
  const Result r = run("simulate --model free-body-com --group so3xr3 --dt 1e-2 --tf 10 --out " +
                       path("fb.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const std::vector<std::string> rows = lines(slurp(path("fb.csv")));
  ASSERT_EQ(rows.size(), 1002u);
  EXPECT_EQ(split(rows[0])[1], "box_com_drift_m");
  for (size_t i = 1; i < rows.size(); ++i) ASSERT_EQ(split(rows[i])[1], "0") << "row " << i;
}

TEST_F(Cli, StrideAndSeveralRuns) {
  const Result r = run("simulate --model heavy-top --group se3 --group so3xr3 --dt 1e-2 --dt 5e-3 "
                       "--tf 1 --stride 10 --out " + path("run.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(lines(slurp(path("run_se3_dt0.01.csv"))).size(), 12u);
  EXPECT_EQ(lines(slurp(path("run_so3xr3_dt0.01.csv"))).size(), 12u);
  EXPECT_EQ(lines(slurp(path("run_se3_dt0.005.csv"))).size(), 22u);
  EXPECT_EQ(lines(slurp(path("run_so3xr3_dt0.005.csv"))).size(), 22u);
}

TEST_F(Cli, QuaternionParameterization) {
  const Result r = run("simulate --model heavy-top --param quaternion --dt 1e-2 --tf 1 --out " +
                       path("q.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(lines(slurp(path("q.csv"))).size(), 102u);
}

TEST_F(Cli, ConfigErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("simulate --model no-such-model --dt 1e-2").code, 1);
  EXPECT_EQ(run("simulate --model heavy-top --group se2 --dt 1e-2").code, 1);
  EXPECT_EQ(run("simulate --model heavy-top --dt -1").code, 1);
  EXPECT_EQ(run("simulate --model heavy-top --dt 0.3 --tf 1").code, 1);  // not a multiple
  EXPECT_EQ(run("simulate --model heavy-top --param euler --dt 1e-2").code, 1);
  EXPECT_EQ(run("simulate --model heavy-top --dt 1e-2 --stride 0").code, 1);
  EXPECT_EQ(run("simulate --model heavy-top --model-file x.json --dt 1e-2").code, 1);
  EXPECT_EQ(run("simulate --model heavy-top --dt 1e-2 --dt 1e-3 --tf 1").code, 1);  // needs --out
  EXPECT_EQ(run("verify --criterion 99").code, 1);
}

TEST_F(Cli, ModelFileErrors) {
  {
    std::ofstream(path("broken.json")) << "{ \"name\": ";
  }
  const Result parse = run("simulate --model-file " + path("broken.json") + " --dt 1e-2 --tf 1");
  EXPECT_EQ(parse.code, 1);
  EXPECT_NE(parse.out.find("parse error"), std::string::npos) << parse.out;

  {
    std::ofstream(path("schema.json")) << R"({"bodies": [{"name": "b", "mass_kg": -1,
      "inertia_kgm2": [[1,0,0],[0,1,0],[0,0,1]]}], "initial": {"bodies": []}})";
  }
  const Result schema = run("simulate --model-file " + path("schema.json") + " --dt 1e-2 --tf 1");
  EXPECT_EQ(schema.code, 1);
  EXPECT_NE(schema.out.find("schema error"), std::string::npos) << schema.out;
}

TEST_F(Cli, ModelFileSimulates) {
  // a spinning free body: no joints, nothing to be infeasible
  {
    std::ofstream(path("spin.json")) << R"({"name": "spin",
      "bodies": [{"name": "b", "mass_kg": 2.0, "inertia_kgm2": [[0.1,0,0],[0,0.2,0],[0,0,0.3]]}],
      "initial": {"bodies": [{"body": "b", "rotation": [[1,0,0],[0,1,0],[0,0,1]],
        "position_m": [0,0,0], "omega_rad_per_s": [1,2,3], "v_m_per_s": [0,0,0]}]},
      "t_final_s": 0.5})";
  }
  const Result r = run("simulate --model-file " + path("spin.json") + " --dt 1e-2 --out " +
                       path("spin.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(lines(slurp(path("spin.csv"))).size(), 52u);
}

TEST_F(Cli, SimulationFailureExitsTwoWithStep) {
  // dexpinv pole: 3 s steps at 5 rad/s rotate by 15 rad in one step
  {
    std::ofstream(path("fast.json")) << R"({"name": "fast",
      "bodies": [{"name": "b", "mass_kg": 1.0, "inertia_kgm2": [[1,0,0],[0,1,0],[0,0,1]]}],
      "initial": {"bodies": [{"body": "b", "rotation": [[1,0,0],[0,1,0],[0,0,1]],
        "position_m": [0,0,0], "omega_rad_per_s": [3,4,0], "v_m_per_s": [0,0,0]}]}})";
  }
  const Result r = run("simulate --model-file " + path("fast.json") + " --dt 3 --tf 6");
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("step 1"), std::string::npos) << r.out;
}

TEST_F(Cli, ListModels) {
  const Result r = run("list-models");
  ASSERT_EQ(r.code, 0);
  for (const char* id : {"free-body-com", "free-body-com-translating", "free-body-offset",
                         "free-body-offset-translating", "heavy-top", "double-pendulum",
                         "four-bar", "rp-chain", "cardan"}) {
    EXPECT_NE(r.out.find(std::string(id) + "\t"), std::string::npos) << id;
  }
  EXPECT_EQ(lines(r.out).size(), 9u);
}

TEST_F(Cli, SweepSummary) {
  const Result r = run("sweep --model heavy-top --model cardan --dt 1e-2 --dt 5e-3 --dt 2e-3 "
                       "--tf 0.2 --out " + path("sweep.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const std::vector<std::string> rows = lines(slurp(path("sweep.csv")));
  // 2 models x 2 groups x 3 step sizes
  ASSERT_EQ(rows.size(), 13u);
  EXPECT_EQ(rows[0],
            "model,group,param,dt_s,t_final_s,steps,max_position_residual_m,"
            "max_orientation_residual,max_rotation_error_rad,max_translation_error_m,"
            "max_com_drift_m,energy_drift_J,position_residual_order,translation_error_order");
  int se3_top = 0;
  for (size_t i = 1; i < rows.size(); ++i) {
    const std::vector<std::string> f = split(rows[i]);
    if (f[0] == "heavy-top" && f[1] == "se3") {
      ++se3_top;
      EXPECT_LT(std::stod(f[6]), 1e-12);
      EXPECT_EQ(f[12], "floor");
    }
  }
  EXPECT_EQ(se3_top, 3);
}

TEST_F(Cli, VerifySubsetAndMutation) {
  const Result ok = run("verify --criterion 1 --criterion 2");
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_EQ(ok.out.rfind("PASS  1", 0), 0u) << ok.out;

  // the second-order dexpinv series must be caught by the kernel suite but
  // not by the exactness or convergence checks
  const Result mutant = run("verify --dexpinv-approx --criterion 1 --criterion 2 --criterion 4");
  EXPECT_EQ(mutant.code, 3) << mutant.out;
  const std::vector<std::string> out = lines(mutant.out);
  ASSERT_EQ(out.size(), 3u) << mutant.out;
  EXPECT_EQ(out[0].rfind("FAIL  1", 0), 0u) << out[0];
  EXPECT_EQ(out[1].rfind("PASS  2", 0), 0u) << out[1];
  EXPECT_EQ(out[2].rfind("PASS  4", 0), 0u) << out[2];
}
