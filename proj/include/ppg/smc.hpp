#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ppg/fk_model.hpp"
#include "ppg/rng.hpp"
#include "ppg/state.hpp"

namespace ppg {

// log(sum_i exp(log_w[i])); -infinity for an empty or all -infinity input.
double log_sum_exp(std::span<const double> log_w);

// Cumulative normalised weights from log weights. The last entry is 1.
// Throws DegenerateWeightsError if every weight is zero and NumericalError
// on NaN or +infinity.
std::vector<double> cumulative_weights(std::span<const double> log_w);

// Normalised probabilities exp(log_w[i] - log_sum_exp(log_w)).
std::vector<double> normalized_weights(std::span<const double> log_w);

// Inverse-CDF draw: the smallest index whose cumulative weight exceeds
// u * total. Indices with zero weight are never returned.
std::size_t sample_categorical(std::span<const double> cumulative, double u) noexcept;

// Particle positions at time m with cached log-potentials log g_m and the
// cumulative selection weights derived from them.
class ParticleCloud {
 public:
  ParticleCloud() = default;
  ParticleCloud(const FeynmanKacModel& model, std::size_t time, StateArray positions);

  std::size_t time() const noexcept { return time_; }
  std::size_t size() const noexcept { return positions_.size(); }
  std::size_t dim() const noexcept { return positions_.dim(); }
  State position(std::size_t i) const noexcept { return positions_[i]; }
  const StateArray& positions() const noexcept { return positions_; }
  std::span<const double> log_potentials() const noexcept { return log_potentials_; }

  // True when every potential is zero; selection then fails.
  bool degenerate() const noexcept { return cumulative_.empty(); }

  // Cumulative normalised potentials; empty for a degenerate cloud.
  std::span<const double> cumulative_selection() const noexcept { return cumulative_; }

  // Selection probabilities g(x_l) / sum g.
  std::vector<double> selection_probabilities() const;

  // Selection draw from a uniform variate.
  std::size_t select(double u) const;

 private:
  std::size_t time_ = 0;
  StateArray positions_;
  std::vector<double> log_potentials_;
  std::vector<double> cumulative_;
};

// N i.i.d. draws from eta_0.
ParticleCloud init_cloud(const FeynmanKacModel& model, std::size_t num_particles, Rng& rng);

// N i.i.d. draws from Phi_m(mu(cloud)): multinomial selection by normalised
// potentials followed by mutation. When `ancestors` is non-null it receives
// the selected ancestor index of every new particle.
ParticleCloud propagate(const FeynmanKacModel& model, const ParticleCloud& cloud, Rng& rng,
                        std::vector<std::size_t>* ancestors = nullptr);

struct ConditionalCloud {
  ParticleCloud cloud;
  std::size_t frozen_slot;
};

// Conditional dual kernel: z_next at a uniformly drawn slot, the N - 1 other
// slots i.i.d. from Phi_m(mu(cloud)).
ConditionalCloud propagate_conditional(const FeynmanKacModel& model, const ParticleCloud& cloud,
                                       State z_next, Rng& rng,
                                       std::vector<std::size_t>* ancestors = nullptr);

// Same at time 0 with eta_0 in place of Phi_m.
ConditionalCloud init_cloud_conditional(const FeynmanKacModel& model, std::size_t num_particles,
                                        State z0, Rng& rng);

}  // namespace ppg
