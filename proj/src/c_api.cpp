#include "ppg/ppg.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppg/bench.hpp"
#include "ppg/error.hpp"
#include "ppg/experiment_config.hpp"
#include "ppg/gibbs.hpp"
#include "ppg/models.hpp"
#include "ppg/oracles.hpp"
#include "ppg/paris.hpp"

struct ppg_model {
  ppg::ModelSpec spec;
  std::vector<double> observations;
  std::unique_ptr<ppg::FeynmanKacModel> fk;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
ppg_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return PPG_OK;
  } catch (const ppg::Error& e) {
    g_last_error = e.what();
    return static_cast<ppg_status>(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PPG_INTERNAL_ERROR;
  } catch (...) {
    g_last_error = "unknown failure";
    return PPG_INTERNAL_ERROR;
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw ppg::InputError(std::string(name) + " must not be null");
}

ppg::BackwardMode to_mode(ppg_backward_mode mode) {
  switch (mode) {
    case PPG_BACKWARD_EXACT: return ppg::BackwardMode::kExact;
    case PPG_BACKWARD_ACCEPT_REJECT: return ppg::BackwardMode::kAcceptReject;
    case PPG_BACKWARD_AUTO: return ppg::BackwardMode::kAuto;
  }
  throw ppg::InputError("unknown backward mode");
}

void require_horizon(const ppg_model& model, std::size_t n) {
  if (model.observations.size() < n + 1) {
    throw ppg::InputError("model holds " + std::to_string(model.observations.size()) +
                          " observations; horizon n needs n + 1");
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ppg::ExperimentFile parse_file(const char* config_json) {
  require(config_json, "config_json");
  return ppg::parse_experiment_json(config_json);
}

void run_and_write(const ppg::ExperimentFile& file, const char* out_dir, std::size_t threads) {
  require(out_dir, "out_dir");
  const ppg::ExperimentOutput output = ppg::run_experiment_file(file, threads == 0 ? 1 : threads);
  ppg::write_experiment_outputs(out_dir, file, output);
}

nlohmann::ordered_json oracle_json(const ppg::ExperimentFile& file) {
  using nlohmann::ordered_json;
  const ppg::ExperimentConfig& c = file.base;
  ordered_json j;
  j["model"] = ppg::model_name(c.model);
  j["n"] = c.n;
  if (std::holds_alternative<ppg::StochVol>(c.model)) {
    throw ppg::UnsupportedModelError("no exact oracle; use reference run");
  }
  std::vector<double> obs = ppg::load_observations(file);
  obs.resize(c.n + 1);
  const ppg::ExactValue exact = ppg::reference_value(c, obs);
  j["exact"] = exact.value;
  j["source"] = exact.source;
  if (const auto* lg = std::get_if<ppg::Lgssm>(&c.model)) {
    const ppg::SmoothingMoments mom = ppg::lgssm_target_moments(*lg, obs);
    j["mean"] = mom.mean;
    j["variance"] = mom.variance;
    j["lag_one"] = mom.lag_one;
  } else {
    const auto& hmm = std::get<ppg::DiscreteHmm>(c.model);
    if (std::pow(static_cast<double>(hmm.num_states()), static_cast<double>(c.n + 1)) <= 1e6) {
      j["enumeration"] = ppg::discrete_enumerate_smoothing(hmm, obs, ppg::one_lag_functional(hmm, c.n), c.n);
    }
  }
  return j;
}

}  // namespace

extern "C" {

const char* ppg_version(void) { return ppg::kLibraryVersion; }

const char* ppg_last_error(void) { return g_last_error.c_str(); }

const char* ppg_status_name(ppg_status status) {
  if (status == PPG_OK) return "ok";
  return ppg::error_code_name(static_cast<ppg::ErrorCode>(status));
}

ppg_status ppg_model_create(const char* model_json, const double* observations, size_t count, ppg_model** out) {
  return guarded([&] {
    require(model_json, "model_json");
    require(out, "out");
    if (count > 0) require(observations, "observations");
    *out = nullptr;
    auto model = std::make_unique<ppg_model>();
    model->spec = ppg::parse_model_json(model_json);
    model->observations.assign(observations, observations + count);
    model->fk = ppg::make_feynman_kac(model->spec, model->observations);
    *out = model.release();
  });
}

void ppg_model_free(ppg_model* model) { delete model; }

ppg_status ppg_simulate(const char* model_json, size_t n, uint64_t seed, double* states, double* observations) {
  return guarded([&] {
    require(model_json, "model_json");
    require(observations, "observations");
    const ppg::ModelSpec spec = ppg::parse_model_json(model_json);
    ppg::Rng rng(seed);
    const ppg::SimulatedRecord rec = ppg::simulate(spec, n, rng);
    std::copy(rec.observations.begin(), rec.observations.end(), observations);
    if (states != nullptr) std::copy(rec.states.begin(), rec.states.end(), states);
  });
}

ppg_status ppg_run_paris(const ppg_model* model, size_t n, size_t num_particles, size_t backward_draws,
                         ppg_backward_mode mode, uint64_t seed, double* estimate) {
  return guarded([&] {
    require(model, "model");
    require(estimate, "estimate");
    require_horizon(*model, n);
    ppg::Rng rng(seed);
    const ppg::ParisOptions options{backward_draws, to_mode(mode), 0};
    *estimate = ppg::run_paris(*model->fk, ppg::one_lag_functional(model->spec, n), n, num_particles, options, rng);
  });
}

ppg_status ppg_run_ffbsm(const ppg_model* model, size_t n, size_t num_particles, uint64_t seed, double* estimate) {
  return guarded([&] {
    require(model, "model");
    require(estimate, "estimate");
    require_horizon(*model, n);
    ppg::Rng rng(seed);
    *estimate = ppg::run_ffbsm(*model->fk, ppg::one_lag_functional(model->spec, n), n, num_particles, rng);
  });
}

ppg_status ppg_run_ppg(const ppg_model* model, size_t n, size_t num_particles, size_t backward_draws, size_t k,
                       size_t k0, ppg_backward_mode mode, uint64_t seed, double* rollout, double* per_iteration) {
  return guarded([&] {
    require(model, "model");
    require(rollout, "rollout");
    require_horizon(*model, n);
    ppg::Rng rng(seed);
    const ppg::ParisOptions options{backward_draws, to_mode(mode), 0};
    const ppg::Trajectory zeta = ppg::default_init_path(*model->fk, n, num_particles, rng, options.mode);
    const ppg::PpgRun run =
        ppg::run_ppg(*model->fk, ppg::one_lag_functional(model->spec, n), num_particles, k, k0, zeta, options, rng);
    *rollout = run.rollout;
    if (per_iteration != nullptr) std::copy(run.per_iteration.begin(), run.per_iteration.end(), per_iteration);
  });
}

ppg_status ppg_exact_one_lag(const ppg_model* model, size_t n, double* value) {
  return guarded([&] {
    require(model, "model");
    require(value, "value");
    require_horizon(*model, n);
    if (std::holds_alternative<ppg::StochVol>(model->spec)) {
      throw ppg::UnsupportedModelError("no exact oracle; use reference run");
    }
    ppg::ExperimentConfig config;
    config.model = model->spec;
    config.n = n;
    *value = ppg::reference_value(config, model->observations).value;
  });
}

ppg_status ppg_mixing_rho(const ppg_model* model, size_t n, double* rho) {
  return guarded([&] {
    require(model, "model");
    require(rho, "rho");
    require_horizon(*model, n);
    *rho = ppg::mixing_constant_rho(*model->fk, n);
  });
}

ppg_status ppg_kappa(double rho, size_t n, size_t num_particles, double* value) {
  return guarded([&] {
    require(value, "value");
    *value = ppg::kappa(rho, n, num_particles);
  });
}

ppg_status ppg_cmd_simulate(const char* config_json, const char* out_dir) {
  return guarded([&] {
    const ppg::ExperimentFile file = parse_file(config_json);
    require(out_dir, "out_dir");
    if (file.observations.csv_path) throw ppg::InputError("simulate needs an observation seed, not a CSV path");
    ppg::Rng rng(file.observations.seed);
    const ppg::SimulatedRecord rec = ppg::simulate(file.base.model, file.base.n, rng);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ppg::IoError(std::string("cannot create output directory '") + out_dir + "': " + ec.message());
    ppg::write_observations_csv((std::filesystem::path(out_dir) / "observations.csv").string(), rec.observations);
  });
}

ppg_status ppg_cmd_run(const char* config_json, const char* out_dir, size_t threads) {
  return guarded([&] {
    const ppg::ExperimentFile file = parse_file(config_json);
    if (file.grid) throw ppg::InputError("run takes a single cell; use sweep for grids");
    run_and_write(file, out_dir, threads);
  });
}

ppg_status ppg_cmd_sweep(const char* config_json, const char* out_dir, size_t threads) {
  return guarded([&] { run_and_write(parse_file(config_json), out_dir, threads); });
}

ppg_status ppg_cmd_oracle(const char* config_json, char** result_json) {
  return guarded([&] {
    require(result_json, "result_json");
    *result_json = nullptr;
    *result_json = duplicate(oracle_json(parse_file(config_json)).dump(2));
  });
}

ppg_status ppg_cmd_bounds(const char* config_json, size_t ell, char** result_json) {
  return guarded([&] {
    require(result_json, "result_json");
    *result_json = nullptr;
    const ppg::ExperimentFile file = parse_file(config_json);
    const ppg::ExperimentConfig& c = file.base;
    std::vector<double> obs = ppg::load_observations(file);
    obs.resize(c.n + 1);
    const auto model = ppg::make_feynman_kac(c.model, obs);
    const ppg::AdditiveFunctional f = ppg::one_lag_functional(c.model, c.n);
    const ppg::BoundShapes b = ppg::evaluate_bounds(*model, f, c.n, c.num_particles, ell);
    nlohmann::ordered_json j;
    j["model"] = ppg::model_name(c.model);
    j["n"] = c.n;
    j["N"] = c.num_particles;
    j["ell"] = ell;
    j["rho"] = b.rho;
    j["critical_N"] = ppg::critical_particle_count(b.rho, c.n);
    j["kappa"] = b.kappa;
    j["sup_norm_sum"] = b.sup_norm_sum;
    j["bias_bound"] = b.bias_bound;
    j["mse_bound"] = b.mse_bound;
    if (c.estimator == ppg::Estimator::kPpg) {
      const ppg::BoundShapes r = ppg::evaluate_rollout_bounds(*model, f, c.n, c.num_particles, c.k, c.k0);
      j["rollout"] = {{"k", c.k}, {"k0", c.k0}, {"bias_bound", r.bias_bound}, {"mse_bound", r.mse_bound}};
    }
    j["constants"] = "unknown constants set to 1";
    *result_json = duplicate(j.dump(2));
  });
}

void ppg_string_free(char* s) { std::free(s); }

}  // extern "C"
