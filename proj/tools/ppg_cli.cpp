// ppg: command-line front end over the C interface.
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ppg/ppg.h"

namespace {

constexpr int kUsageExit = 64;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t threads = 0;
  std::size_t ell = 1;
};

void print_error(const std::string& code, int status, const std::string& message) {
  const nlohmann::ordered_json err = {{"error", {{"status", status}, {"code", code}, {"message", message}}}};
  std::cerr << err.dump() << '\n';
}

int fail(ppg_status status) {
  print_error(ppg_status_name(status), static_cast<int>(status), ppg_last_error());
  return static_cast<int>(status);
}

// Reads the config file and applies --seed to the field the command uses.
int load_config(const Options& opt, const char* seed_field, std::string& out) {
  std::ifstream in(opt.config_path, std::ios::binary);
  if (!in) {
    print_error(ppg_status_name(PPG_IO_ERROR), PPG_IO_ERROR, "cannot read config '" + opt.config_path + "'");
    return PPG_IO_ERROR;
  }
  std::ostringstream text;
  text << in.rdbuf();
  out = text.str();
  if (!opt.seed_given) return 0;
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(out);
  } catch (const nlohmann::json::exception& e) {
    print_error(ppg_status_name(PPG_INPUT_ERROR), PPG_INPUT_ERROR, std::string("config is not valid JSON: ") + e.what());
    return PPG_INPUT_ERROR;
  }
  if (std::string(seed_field) == "observations") {
    if (!j.contains("observations") || !j["observations"].is_object()) j["observations"] = nlohmann::ordered_json::object();
    j["observations"]["seed"] = opt.seed;
  } else {
    j[seed_field] = opt.seed;
  }
  out = j.dump();
  return 0;
}

std::string output_dir(const Options& opt) {
  if (!opt.out_dir.empty()) return opt.out_dir;
  if (const char* env = std::getenv("PPG_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "ppg_out";
}

int emit_json(ppg_status status, char* json, const Options& opt, const char* file_name) {
  if (status != PPG_OK) return fail(status);
  const std::string text = std::string(json) + "\n";
  ppg_string_free(json);
  std::cout << text;
  if (!opt.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    std::ofstream out(std::filesystem::path(opt.out_dir) / file_name, std::ios::binary | std::ios::trunc);
    if (ec || !(out << text)) {
      print_error(ppg_status_name(PPG_IO_ERROR), PPG_IO_ERROR, "cannot write into '" + opt.out_dir + "'");
      return PPG_IO_ERROR;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle smoothing experiments: PARIS, FFBSm and Parisian particle Gibbs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ppg_version()));

  Options opt;
  const auto add_common = [&](CLI::App* sub, bool threaded) {
    sub->add_option("-c,--config", opt.config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", opt.out_dir, "Output directory (default: $PPG_OUTPUT_DIR or ./ppg_out)");
    sub->add_option("--seed", opt.seed, "Override the config seed");
    if (threaded) {
      sub->add_option("-j,--threads", opt.threads, "Worker threads (default: hardware threads)")
          ->check(CLI::PositiveNumber);
    }
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Simulate an observation record (observations.csv)");
  add_common(simulate, false);
  CLI::App* run = app.add_subcommand("run", "Run one experiment cell and write record CSVs");
  add_common(run, true);
  CLI::App* sweep = app.add_subcommand("sweep", "Run the grid of an experiment file and write record CSVs");
  add_common(sweep, true);
  CLI::App* oracle = app.add_subcommand("oracle", "Print the exact smoothing value as JSON");
  add_common(oracle, false);
  CLI::App* bounds = app.add_subcommand("bounds", "Print bias/MSE bound shapes as JSON");
  add_common(bounds, false);
  bounds->add_option("--ell", opt.ell, "Iteration index of the bias bound")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage_error", kUsageExit, e.what());
    return kUsageExit;
  }
  for (CLI::App* sub : {simulate, run, sweep, oracle, bounds}) {
    if (sub->parsed() && sub->count("--seed") > 0) opt.seed_given = true;
  }
  if (opt.threads == 0) opt.threads = std::max(1u, std::thread::hardware_concurrency());

  std::string config;
  if (simulate->parsed()) {
    if (const int rc = load_config(opt, "observations", config); rc != 0) return rc;
    const ppg_status s = ppg_cmd_simulate(config.c_str(), output_dir(opt).c_str());
    return s == PPG_OK ? 0 : fail(s);
  }
  if (const int rc = load_config(opt, "seed", config); rc != 0) return rc;
  if (run->parsed() || sweep->parsed()) {
    const std::string dir = output_dir(opt);
    const ppg_status s = run->parsed() ? ppg_cmd_run(config.c_str(), dir.c_str(), opt.threads)
                                       : ppg_cmd_sweep(config.c_str(), dir.c_str(), opt.threads);
    return s == PPG_OK ? 0 : fail(s);
  }
  char* json = nullptr;
  if (oracle->parsed()) {
    const ppg_status s = ppg_cmd_oracle(config.c_str(), &json);
    return emit_json(s, json, opt, "oracle.json");
  }
  const ppg_status s = ppg_cmd_bounds(config.c_str(), opt.ell, &json);
  return emit_json(s, json, opt, "bounds.json");
}
