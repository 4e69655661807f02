#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ppg/fk_model.hpp"
#include "ppg/paris.hpp"
#include "ppg/smc.hpp"

namespace ppg {

// N stored paths of common length m + 1, flat per particle.
class PathStore {
 public:
  PathStore() = default;
  // Singleton paths (xi_0^i).
  explicit PathStore(const ParticleCloud& cloud);

  std::size_t size() const noexcept { return size_; }
  std::size_t length() const noexcept { return length_; }
  std::size_t dim() const noexcept { return dim_; }

  State state(std::size_t i, std::size_t m) const noexcept {
    return {data_.data() + (i * length_ + m) * dim_, dim_};
  }
  State end_point(std::size_t i) const noexcept { return state(i, length_ - 1); }
  Trajectory trajectory(std::size_t i) const;

  // Path i of the result is (path ancestors[i], next.position(i)).
  PathStore extended(std::span<const std::size_t> ancestors, const ParticleCloud& next) const;

 private:
  std::size_t size_ = 0;
  std::size_t length_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

struct CondParisState {
  ParticleCloud cloud;  // end points xi_{m|m}
  PathStore paths;
  std::vector<double> stats;
  std::size_t frozen_slot = 0;  // slot holding the conditioning state

  std::size_t time() const noexcept { return cloud.time(); }
};

CondParisState cond_paris_init(const FeynmanKacModel& model, std::size_t num_particles, State z0, Rng& rng);

// Deterministic half of a conditional PARIS update. `draws` holds N rows of
// M backward indices into the current state; the first index of row i picks
// the ancestor path of particle i, and all M enter its statistic.
CondParisState cond_paris_apply_draws(const AdditiveFunctional& f, const CondParisState& state,
                                      ConditionalCloud next,
                                      std::span<const std::size_t> draws, std::size_t backward_draws);

// One conditional PARIS update with z_next frozen into the new cloud.
CondParisState cond_paris_step(const FeynmanKacModel& model, const AdditiveFunctional& f,
                               const CondParisState& state, State z_next, const ParisOptions& options,
                               Rng& rng);

struct SweepResult {
  Trajectory new_zeta;
  double estimate;
};

// One PPG iteration: conditional PARIS along zeta, then a uniformly drawn
// stored path as the next conditioning path.
SweepResult ppg_sweep(const FeynmanKacModel& model, const AdditiveFunctional& f, std::size_t num_particles,
                      const Trajectory& zeta, const ParisOptions& options, Rng& rng);

struct PpgRun {
  double rollout;
  std::vector<double> per_iteration;  // iterations 1..k
  Trajectory final_zeta;
};

// k chained sweeps; rollout = mean of the estimates of iterations k0+1..k.
PpgRun run_ppg(const FeynmanKacModel& model, const AdditiveFunctional& f, std::size_t num_particles,
               std::size_t k, std::size_t k0, const Trajectory& init_zeta, const ParisOptions& options,
               Rng& rng);

// floor(k / 2).
constexpr std::size_t default_burn_in(std::size_t k) noexcept { return k / 2; }

// Burn-in-trimmed average of per-iteration estimates.
double rollout_estimate(std::span<const double> per_iteration, std::size_t k0);

// Bootstrap filter with N particles followed by one FFBSi draw.
Trajectory default_init_path(const FeynmanKacModel& model, std::size_t n, std::size_t num_particles,
                             Rng& rng, BackwardMode mode = BackwardMode::kAuto);

}  // namespace ppg
