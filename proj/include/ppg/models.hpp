#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ppg/fk_model.hpp"
#include "ppg/rng.hpp"

namespace ppg {

// X_{m+1} = A X_m + Q eps, Z_m = B X_m + R zeta; X_0 from the stationary law.
struct Lgssm {
  double A = 0.97;
  double Q = 0.60;
  double B = 0.54;
  double R = 0.33;

  void validate() const;
  double stationary_variance() const noexcept { return Q * Q / (1.0 - A * A); }
};

// X_{m+1} = phi X_m + sigma eps, Z_m = beta exp(X_m / 2) zeta; X_0 stationary.
struct StochVol {
  double phi = 0.975;
  double sigma = 0.16;
  double beta = 0.63;

  void validate() const;
  double stationary_variance() const noexcept { return sigma * sigma / (1.0 - phi * phi); }
};

// Finite-state HMM. States are indices 0..S-1 (stored as doubles in model
// states); observations are symbol indices 0..K-1. `values` maps states to
// reals for additive functionals.
struct DiscreteHmm {
  std::vector<std::vector<double>> transition;  // S x S, rows sum to one
  std::vector<std::vector<double>> emission;    // S x K, rows sum to one
  std::vector<double> values;                   // S
  std::vector<double> initial;                  // S

  std::size_t num_states() const noexcept { return transition.size(); }
  std::size_t num_symbols() const noexcept { return emission.empty() ? 0 : emission.front().size(); }
  // Rows stochastic within 1e-12 and every entry strictly positive.
  void validate() const;

  // Uniform initial law and values 0..S-1 when left empty.
  static DiscreteHmm with_defaults(std::vector<std::vector<double>> transition,
                                   std::vector<std::vector<double>> emission);
};

using ModelSpec = std::variant<Lgssm, StochVol, DiscreteHmm>;

std::string model_name(const ModelSpec& spec);

struct SimulatedRecord {
  std::vector<double> states;        // x_{0:n}
  std::vector<double> observations;  // z_{0:n}
};

SimulatedRecord simulate(const Lgssm& model, std::size_t n, Rng& rng);
SimulatedRecord simulate(const StochVol& model, std::size_t n, Rng& rng);
SimulatedRecord simulate(const DiscreteHmm& model, std::size_t n, Rng& rng);
SimulatedRecord simulate(const ModelSpec& spec, std::size_t n, Rng& rng);

class LgssmFeynmanKac final : public FeynmanKacModel {
 public:
  LgssmFeynmanKac(Lgssm params, std::vector<double> observations);

  std::size_t state_dim() const noexcept override { return 1; }
  void sample_initial(Rng& rng, MutableState out) const override;
  void sample_mutation(Rng& rng, std::size_t m, State x, MutableState out) const override;
  double log_transition_density(std::size_t m, State x, State x_next) const override;
  double log_potential(std::size_t m, State x) const override;
  double transition_density_upper(std::size_t m) const override;
  void log_transition_densities(std::size_t m, const StateArray& from, State x_next,
                                std::span<double> out) const override;

  const Lgssm& params() const noexcept { return params_; }
  const std::vector<double>& observations() const noexcept { return observations_; }

 private:
  Lgssm params_;
  std::vector<double> observations_;
  double init_sd_;
  double log_norm_q_;
  double log_norm_r_;
};

class StochVolFeynmanKac final : public FeynmanKacModel {
 public:
  StochVolFeynmanKac(StochVol params, std::vector<double> observations);

  std::size_t state_dim() const noexcept override { return 1; }
  void sample_initial(Rng& rng, MutableState out) const override;
  void sample_mutation(Rng& rng, std::size_t m, State x, MutableState out) const override;
  double log_transition_density(std::size_t m, State x, State x_next) const override;
  double log_potential(std::size_t m, State x) const override;
  double transition_density_upper(std::size_t m) const override;
  void log_transition_densities(std::size_t m, const StateArray& from, State x_next,
                                std::span<double> out) const override;

 private:
  StochVol params_;
  std::vector<double> observations_;
  double init_sd_;
  double log_norm_sigma_;
};

class DiscreteHmmFeynmanKac final : public FeynmanKacModel {
 public:
  DiscreteHmmFeynmanKac(DiscreteHmm params, std::vector<double> observations);

  std::size_t state_dim() const noexcept override { return 1; }
  void sample_initial(Rng& rng, MutableState out) const override;
  void sample_mutation(Rng& rng, std::size_t m, State x, MutableState out) const override;
  double log_transition_density(std::size_t m, State x, State x_next) const override;
  double log_potential(std::size_t m, State x) const override;
  double transition_density_upper(std::size_t m) const override;
  std::optional<MixingBounds> bounds(std::size_t m) const override;
  void log_transition_densities(std::size_t m, const StateArray& from, State x_next,
                                std::span<double> out) const override;
  void transition_densities(std::size_t m, const StateArray& from, State x_next,
                            std::span<double> out) const override;

  const DiscreteHmm& params() const noexcept { return params_; }
  std::size_t symbol(std::size_t m) const;

 private:
  DiscreteHmm params_;
  std::vector<double> observations_;
  std::vector<double> transition_;      // S x S
  std::vector<double> log_transition_;  // S x S
  std::vector<double> log_emission_;    // S x K
  std::vector<std::vector<double>> cumulative_rows_;
  std::vector<double> cumulative_initial_;
  double max_transition_;
  double min_transition_;
};

LgssmFeynmanKac as_feynman_kac(const Lgssm& model, std::vector<double> observations);
StochVolFeynmanKac as_feynman_kac(const StochVol& model, std::vector<double> observations);
DiscreteHmmFeynmanKac as_feynman_kac(const DiscreteHmm& model, std::vector<double> observations);
std::unique_ptr<FeynmanKacModel> make_feynman_kac(const ModelSpec& spec, std::vector<double> observations);

// State one-lag covariance statistic: term_m(a, b) = a * b.
AdditiveFunctional one_lag_functional(std::size_t n);
// The same statistic on the real values attached to discrete states.
AdditiveFunctional one_lag_functional(const DiscreteHmm& model, std::size_t n);
AdditiveFunctional one_lag_functional(const ModelSpec& spec, std::size_t n);

// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

// Observation records as CSV with header "m,z".
void write_observations_csv(std::ostream& out, const std::vector<double>& observations);
void write_observations_csv(const std::string& path, const std::vector<double>& observations);
std::vector<double> read_observations_csv(std::istream& in);
std::vector<double> read_observations_csv(const std::string& path);

}  // namespace ppg
