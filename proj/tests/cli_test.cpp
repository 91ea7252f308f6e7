#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dyadica/report.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* p = std::getenv("DYADICA_CLI");
  return p ? p : "";
}

int run(const std::string& args) {
  const std::string cmd = cli() + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    if (cli().empty()) GTEST_SKIP() << "DYADICA_CLI not set";
    dir_ = fs::temp_directory_path() / ("dyadica_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    std::ofstream(dir_ / "small.ini") << "[ensemble]\ncount = 3\nseed = 42\n[norms]\np = 2,4\nq = 2,inf\n";
  }
  void TearDown() override {
    if (!dir_.empty()) fs::remove_all(dir_);
  }
  std::string config() const { return (dir_ / "small.ini").string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("norms"), 2);  // --out is required
  EXPECT_EQ(run("frobnicate --out " + dir_.string()), 2);
  EXPECT_EQ(run("suite nosuchsuite --out " + (dir_ / "s").string()), 2);
  EXPECT_EQ(run("norms --threads 0 --out " + dir_.string()), 2);
}

TEST_F(Cli, ConfigErrorsExitWithTwo) {
  std::ofstream(dir_ / "bad.ini") << "[root]\nwidth = 3\n";
  EXPECT_EQ(run("norms --config " + (dir_ / "bad.ini").string() + " --out " + dir_.string()), 2);
  EXPECT_EQ(run("norms --config " + (dir_ / "missing.ini").string() + " --out " + dir_.string()), 2);
}

TEST_F(Cli, SameSeedGivesByteIdenticalCsv) {
  ASSERT_EQ(run("norms --config " + config() + " --out " + (dir_ / "a").string()), 0);
  ASSERT_EQ(run("norms --config " + config() + " --out " + (dir_ / "b").string()), 0);
  const std::string a = slurp(dir_ / "a" / "norms.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir_ / "b" / "norms.csv"));
  ASSERT_EQ(run("norms --config " + config() + " --seed 43 --out " + (dir_ / "c").string()), 0);
  EXPECT_NE(a, slurp(dir_ / "c" / "norms.csv"));
}

TEST_F(Cli, NormsCsvCoversTheLatticeWithConfigHash) {
  ASSERT_EQ(run("norms --config " + config() + " --out " + dir_.string()), 0);
  const auto rows = dyadica::parse_csv(slurp(dir_ / "norms.csv"));
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows[0][0], "config_hash");
  EXPECT_EQ(rows.size(), 1u + 3u * (4u + 1u));  // 3 functions x (2 p x 2 q + bmo)
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][0], rows[1][0]);
  EXPECT_TRUE(fs::exists(dir_ / "config.resolved.ini"));
}

TEST_F(Cli, ResolvedConfigReloadsToTheSameHash) {
  ASSERT_EQ(run("norms --config " + config() + " --out " + (dir_ / "a").string()), 0);
  ASSERT_EQ(run("norms --config " + (dir_ / "a" / "config.resolved.ini").string() + " --out " + (dir_ / "b").string()),
            0);
  EXPECT_EQ(slurp(dir_ / "a" / "norms.csv"), slurp(dir_ / "b" / "norms.csv"));
}

TEST_F(Cli, SubcommandsWriteTheirArtifacts) {
  ASSERT_EQ(run("paraproduct --config " + config() + " --out " + dir_.string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "paraproduct.bin"));
  EXPECT_TRUE(fs::exists(dir_ / "adjoint_2.bin"));
  EXPECT_TRUE(fs::exists(dir_ / "paraproduct.csv"));
  ASSERT_EQ(run("sparse --config " + config() + " --out " + dir_.string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "sparse_collection.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "sparse_packing.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "sparse_report.csv"));
  std::ofstream(dir_ / "zero.ini") << "[kernel.nothing]\nkind = zero\n";
  ASSERT_EQ(run("testbench --config " + (dir_ / "zero.ini").string() + " --out " + dir_.string()), 0);
  const auto rows = dyadica::parse_csv(slurp(dir_ / "testbench.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][1], "nothing");
  EXPECT_EQ(rows[1][9], "0");  // testing norm of the zero kernel
}

TEST_F(Cli, SparseReadsInputGrids) {
  ASSERT_EQ(run("paraproduct --config " + config() + " --out " + dir_.string()), 0);
  std::ofstream(dir_ / "in.ini") << "[sparse]\nmode = mainiter\n[inputs]\nfiles = " << (dir_ / "paraproduct.bin").string()
                                 << "\n";
  EXPECT_EQ(run("sparse --config " + (dir_ / "in.ini").string() + " --out " + (dir_ / "sp").string()), 0);
  std::ofstream(dir_ / "wrong.ini") << "[root]\nfinest = -5\n[inputs]\nfiles = " << (dir_ / "paraproduct.bin").string()
                                    << "\n";
  EXPECT_EQ(run("norms --config " + (dir_ / "wrong.ini").string() + " --out " + (dir_ / "w").string()), 2);
}

TEST_F(Cli, WaveletSuitePasses) {
  EXPECT_EQ(run("suite wavelet --out " + (dir_ / "suite").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "suite" / "summary.csv"));
}
