#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ppg/ppg.h"

namespace {

const char* kLgssm = R"({"type": "lgssm"})";
const char* kDiscrete =
    R"({"type": "discrete", "transition": [[0.9, 0.1], [0.2, 0.8]], "emission": [[0.7, 0.3], [0.4, 0.6]]})";

std::vector<double> simulated(const char* model, std::size_t n, std::uint64_t seed) {
  std::vector<double> z(n + 1);
  EXPECT_EQ(ppg_simulate(model, n, seed, nullptr, z.data()), PPG_OK);
  return z;
}

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(ppg_version(), "0.1.0");
  EXPECT_STREQ(ppg_status_name(PPG_OK), "ok");
  EXPECT_STREQ(ppg_status_name(PPG_INPUT_ERROR), "input_error");
  EXPECT_STREQ(ppg_status_name(PPG_UNSUPPORTED_MODEL), "unsupported_model");
}

TEST(CApi, ModelLifecycle) {
  const auto z = simulated(kLgssm, 10, 3);
  ppg_model* m = nullptr;
  ASSERT_EQ(ppg_model_create(kLgssm, z.data(), z.size(), &m), PPG_OK);
  double a = 0.0, b = 0.0;
  EXPECT_EQ(ppg_run_paris(m, 10, 100, 2, PPG_BACKWARD_AUTO, 7, &a), PPG_OK);
  EXPECT_EQ(ppg_run_paris(m, 10, 100, 2, PPG_BACKWARD_AUTO, 7, &b), PPG_OK);
  EXPECT_EQ(a, b);
  double exact = 0.0;
  EXPECT_EQ(ppg_exact_one_lag(m, 10, &exact), PPG_OK);
  EXPECT_TRUE(std::isfinite(exact));
  double ff = 0.0;
  EXPECT_EQ(ppg_run_ffbsm(m, 10, 50, 1, &ff), PPG_OK);
  std::vector<double> iters(4);
  double roll = 0.0;
  EXPECT_EQ(ppg_run_ppg(m, 10, 30, 2, 4, 2, PPG_BACKWARD_EXACT, 5, &roll, iters.data()), PPG_OK);
  EXPECT_NEAR(roll, 0.5 * (iters[2] + iters[3]), 1e-12);
  EXPECT_EQ(ppg_run_ppg(m, 10, 30, 2, 4, 2, PPG_BACKWARD_EXACT, 5, &roll, nullptr), PPG_OK);
  ppg_model_free(m);
  ppg_model_free(nullptr);
}

TEST(CApi, ErrorsCarryMessages) {
  ppg_model* m = nullptr;
  EXPECT_EQ(ppg_model_create(R"({"type": "garch"})", nullptr, 0, &m), PPG_INPUT_ERROR);
  EXPECT_EQ(m, nullptr);
  EXPECT_GT(std::strlen(ppg_last_error()), 0u);
  EXPECT_EQ(ppg_model_create("{", nullptr, 0, &m), PPG_INPUT_ERROR);
  EXPECT_EQ(ppg_model_create(kLgssm, nullptr, 0, nullptr), PPG_INPUT_ERROR);

  const auto z = simulated(kLgssm, 3, 1);
  ASSERT_EQ(ppg_model_create(kLgssm, z.data(), z.size(), &m), PPG_OK);
  double out = 0.0;
  EXPECT_EQ(ppg_run_paris(m, 3, 10, 0, PPG_BACKWARD_AUTO, 1, &out), PPG_INPUT_ERROR);
  EXPECT_EQ(ppg_run_paris(m, 3, 10, 2, static_cast<ppg_backward_mode>(9), 1, &out), PPG_INPUT_ERROR);
  EXPECT_EQ(ppg_run_paris(m, 3, 10, 2, PPG_BACKWARD_AUTO, 1, nullptr), PPG_INPUT_ERROR);
  EXPECT_EQ(ppg_mixing_rho(m, 3, &out), PPG_UNSUPPORTED_MODEL);
  ppg_model_free(m);
  EXPECT_EQ(ppg_run_paris(nullptr, 3, 10, 2, PPG_BACKWARD_AUTO, 1, &out), PPG_INPUT_ERROR);
}

TEST(CApi, KappaAndRho) {
  double k = 0.0;
  ASSERT_EQ(ppg_kappa(1.0, 1, 100, &k), PPG_OK);
  EXPECT_NEAR(k, 0.1383928571428572, 1e-15);
  ASSERT_EQ(ppg_kappa(8.0, 2, 400, &k), PPG_OK);
  EXPECT_NEAR(k, 0.9448324022346368, 1e-15);
  EXPECT_EQ(ppg_kappa(1.0, 1, 3, &k), PPG_DOMAIN_ERROR);
  EXPECT_EQ(ppg_kappa(0.5, 1, 100, &k), PPG_DOMAIN_ERROR);

  const auto z = simulated(kDiscrete, 5, 2);
  ppg_model* m = nullptr;
  ASSERT_EQ(ppg_model_create(kDiscrete, z.data(), z.size(), &m), PPG_OK);
  double rho = 0.0;
  ASSERT_EQ(ppg_mixing_rho(m, 5, &rho), PPG_OK);
  double expected = 1.0;
  for (double sym : z) expected = std::max(expected, 9.0 * (sym == 0.0 ? 0.7 / 0.4 : 0.6 / 0.3));
  EXPECT_NEAR(rho, expected, 1e-12);
  ppg_model_free(m);
}

TEST(CApi, OracleAndBoundsJson) {
  char* out = nullptr;
  ASSERT_EQ(ppg_cmd_oracle(R"({"schema_version": 1, "model": {"type": "lgssm"}, "n": 0})", &out), PPG_OK);
  const std::string s(out);
  ppg_string_free(out);
  EXPECT_NE(s.find("\"exact\""), std::string::npos);
  EXPECT_NE(s.find("kalman_rts"), std::string::npos);

  out = nullptr;
  EXPECT_EQ(ppg_cmd_oracle(R"({"schema_version": 1, "model": {"type": "stochvol"}})", &out), PPG_UNSUPPORTED_MODEL);
  EXPECT_EQ(out, nullptr);

  const std::string cfg = std::string(R"({"schema_version": 1, "n": 3, "N": 5000, "model": )") + kDiscrete + "}";
  ASSERT_EQ(ppg_cmd_bounds(cfg.c_str(), 2, &out), PPG_OK);
  const std::string b(out);
  ppg_string_free(out);
  EXPECT_NE(b.find("\"kappa\""), std::string::npos);
  EXPECT_NE(b.find("\"critical_N\""), std::string::npos);
}

TEST(CApi, SimulateIsDeterministic) {
  std::vector<double> x1(6), z1(6), x2(6), z2(6);
  ASSERT_EQ(ppg_simulate(kLgssm, 5, 9, x1.data(), z1.data()), PPG_OK);
  ASSERT_EQ(ppg_simulate(kLgssm, 5, 9, x2.data(), z2.data()), PPG_OK);
  EXPECT_EQ(x1, x2);
  EXPECT_EQ(z1, z2);
  EXPECT_EQ(ppg_simulate(kLgssm, 5, 9, x1.data(), nullptr), PPG_INPUT_ERROR);
}
