#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ppg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path config(const std::string& name, const std::string& json) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << json;
    return p;
  }

  Result run(const std::string& args, const std::string& env = "") {
    const fs::path out = dir_ / "stdout.txt";
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && " + env + (env.empty() ? "" : " ") + "'" + PPG_CLI_PATH +
                            "' " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
    const int raw = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path dir_;
};

const char* kSmall = R"({"schema_version": 1, "model": {"type": "lgssm"}, "n": 6, "N": 16)";

std::string cfg(const std::string& extra) { return std::string(kSmall) + (extra.empty() ? "" : ", " + extra) + "}"; }

}  // namespace

TEST_F(Cli, SimulateHorizonZeroWritesOneRow) {
  const auto c = config("c.json", R"({"schema_version": 1, "model": {"type": "lgssm"}, "n": 0})");
  const Result r = run("simulate -c '" + c.string() + "' -o sim");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(slurp(dir_ / "sim" / "observations.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "m,z");
  EXPECT_EQ(rows[1].substr(0, 2), "0,");
}

TEST_F(Cli, RunReplaysByteIdentically) {
  const auto c = config("c.json", cfg(R"("replicates": 3)"));
  ASSERT_EQ(run("run -c '" + c.string() + "' -o a").code, 0);
  ASSERT_EQ(run("run -c '" + c.string() + "' -o b -j 2").code, 0);
  for (const char* f : {"records.csv", "summary.csv", "manifest.json", "observations.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  ASSERT_EQ(run("run -c '" + c.string() + "' -o s --seed 99").code, 0);
  EXPECT_NE(slurp(dir_ / "a" / "records.csv"), slurp(dir_ / "s" / "records.csv"));
}

TEST_F(Cli, SingleReplicateGivesOneRecord) {
  const auto c = config("c.json", cfg(""));
  ASSERT_EQ(run("run -c '" + c.string() + "' -o out").code, 0);
  const auto rows = lines(slurp(dir_ / "out" / "records.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "config_hash,model,n,estimator,N,M,k,k0,mode,replicate,seed,estimate,exact,runtime_ms");
  EXPECT_EQ(split(rows[1]).size(), 14u);
}

TEST_F(Cli, InvalidConfigReportsJsonError) {
  const auto c = config("c.json", cfg(R"("estimator": "smc")"));
  const Result r = run("run -c '" + c.string() + "' -o out");
  EXPECT_EQ(r.code, 1);
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j.at("error").at("code"), "input_error");
  EXPECT_EQ(j.at("error").at("status"), 1);
  EXPECT_FALSE(j.at("error").at("message").get<std::string>().empty());
  EXPECT_FALSE(fs::exists(dir_ / "out" / "records.csv"));
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("run -c '" + (dir_ / "missing.json").string() + "'").code, 64);
  EXPECT_EQ(run("frobnicate").code, 64);
  const auto c = config("c.json", cfg(R"("estimator": "ppg", "grid": {"N": [8, 16]})"));
  EXPECT_EQ(run("run -c '" + c.string() + "' -o out").code, 1);
}

TEST_F(Cli, PpgRunWritesIterations) {
  const auto c = config("c.json", cfg(R"("estimator": "ppg", "k": 4, "replicates": 2)"));
  ASSERT_EQ(run("run -c '" + c.string() + "' -o out").code, 0);
  const auto rows = lines(slurp(dir_ / "out" / "iterations.csv"));
  ASSERT_EQ(rows.size(), 1u + 2u * 4u);
  EXPECT_EQ(rows[0], "config_hash,replicate,ell,estimate");
  const auto rec = split(lines(slurp(dir_ / "out" / "records.csv"))[1]);
  EXPECT_EQ(rec[6], "4");
  EXPECT_EQ(rec[7], "2");
}

TEST_F(Cli, SweepGridGivesDistinctHashes) {
  const auto c = config("c.json", cfg(R"("estimator": "ppg", "replicates": 2, "grid": {"N": [8, 16], "k": [2, 3]})"));
  ASSERT_EQ(run("sweep -c '" + c.string() + "' -o out").code, 0);
  const auto rows = lines(slurp(dir_ / "out" / "records.csv"));
  ASSERT_EQ(rows.size(), 1u + 4u * 2u);
  std::set<std::string> hashes;
  for (std::size_t i = 1; i < rows.size(); ++i) hashes.insert(split(rows[i])[0]);
  EXPECT_EQ(hashes.size(), 4u);
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "out" / "manifest.json"));
  EXPECT_EQ(manifest.at("cells").size(), 4u);
}

TEST_F(Cli, BudgetPinnedSweep) {
  const auto c = config(
      "c.json", cfg(R"("estimator": "ppg", "budget": 48, "k0": "last", "grid": {"N": [8, 12, 16, 24]})"));
  ASSERT_EQ(run("sweep -c '" + c.string() + "' -o out").code, 0);
  const auto rows = lines(slurp(dir_ / "out" / "records.csv"));
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cells = split(rows[i]);
    EXPECT_EQ(std::stoul(cells[4]) * std::stoul(cells[6]), 48u);
    EXPECT_EQ(std::stoul(cells[7]), std::stoul(cells[6]) - 1);
  }
}

TEST_F(Cli, OracleRejectsStochVol) {
  const auto c = config("c.json", R"({"schema_version": 1, "model": {"type": "stochvol"}})");
  const Result r = run("oracle -c '" + c.string() + "'");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(nlohmann::json::parse(r.err).at("error").at("code"), "unsupported_model");
}

TEST_F(Cli, OracleLgssmHorizonZero) {
  const auto c = config("c.json", R"({"schema_version": 1, "model": {"type": "lgssm"}, "n": 0})");
  const Result r = run("oracle -c '" + c.string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("exact").get<double>(), 0.0);
  EXPECT_EQ(j.at("source"), "kalman_rts");
}

TEST_F(Cli, OracleDiscreteMatchesEnumerationAndIsIdempotent) {
  const auto c = config("c.json", R"({"schema_version": 1, "n": 4, "model": {"type": "discrete",
      "transition": [[0.8, 0.2], [0.3, 0.7]], "emission": [[0.9, 0.1], [0.2, 0.8]], "values": [-1, 2]}})");
  const Result a = run("oracle -c '" + c.string() + "' -o o");
  const Result b = run("oracle -c '" + c.string() + "'");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(dir_ / "o" / "oracle.json"), a.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_NEAR(j.at("exact").get<double>(), j.at("enumeration").get<double>(), 1e-12);
}

TEST_F(Cli, BoundsCommand) {
  const auto c = config("c.json", R"({"schema_version": 1, "n": 2, "N": 2000, "model": {"type": "discrete",
      "transition": [[0.6, 0.4], [0.4, 0.6]], "emission": [[0.6, 0.4], [0.4, 0.6]]}})");
  const Result r = run("bounds -c '" + c.string() + "' --ell 3");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GT(j.at("kappa").get<double>(), 0.0);
  EXPECT_LT(j.at("kappa").get<double>(), 1.0);
  const auto lg = config("l.json", R"({"schema_version": 1, "model": {"type": "lgssm"}})");
  EXPECT_EQ(run("bounds -c '" + lg.string() + "'").code, 3);
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
  const auto c = config("c.json", cfg(""));
  ASSERT_EQ(run("run -c '" + c.string() + "'", "PPG_OUTPUT_DIR='" + (dir_ / "envdir").string() + "'").code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "envdir" / "records.csv"));
  ASSERT_EQ(run("run -c '" + c.string() + "' -o flag", "PPG_OUTPUT_DIR='" + (dir_ / "unused").string() + "'").code,
            0);
  EXPECT_TRUE(fs::exists(dir_ / "flag" / "records.csv"));
  EXPECT_FALSE(fs::exists(dir_ / "unused"));
  ASSERT_EQ(run("run -c '" + c.string() + "'").code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "ppg_out" / "records.csv"));
}
