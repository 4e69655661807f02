#pragma once

#include <cstddef>
#include <vector>

#include "ppg/backward.hpp"
#include "ppg/fk_model.hpp"
#include "ppg/smc.hpp"

namespace ppg {

struct ParisOptions {
  // M, the number of backward draws per particle and step.
  std::size_t backward_draws = 2;
  BackwardMode mode = BackwardMode::kAuto;
  // Accept-reject trial cap before falling back to exact sampling; 0 means ceil(sqrt(N)).
  std::size_t max_trials = 0;
};

// Particles xi_n^i with their statistics beta_n^i.
struct ParisState {
  ParticleCloud cloud;
  std::vector<double> stats;

  std::size_t time() const noexcept { return cloud.time(); }
};

ParisState paris_init(const FeynmanKacModel& model, std::size_t num_particles, Rng& rng);

// One PARIS update: propagate the cloud, then for every new particle average
// M backward draws of (beta + h_n(xi, xi_new)).
ParisState paris_step(const FeynmanKacModel& model, const AdditiveFunctional& f, const ParisState& state,
                      const ParisOptions& options, Rng& rng);

// mu(beta_n)(id) = N^{-1} sum_i beta_n^i.
double paris_estimate(const ParisState& state) noexcept;

// n PARIS steps from a fresh state, then the estimate of eta_{0:n} h_n.
double run_paris(const FeynmanKacModel& model, const AdditiveFunctional& f, std::size_t n,
                 std::size_t num_particles, const ParisOptions& options, Rng& rng);

// The same recursion with the exact O(N^2) FFBSm update in place of the
// sampled one.
double run_ffbsm(const FeynmanKacModel& model, const AdditiveFunctional& f, std::size_t n,
                 std::size_t num_particles, Rng& rng);

}  // namespace ppg
