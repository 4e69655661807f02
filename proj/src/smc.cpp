#include "ppg/smc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ppg {

double log_sum_exp(std::span<const double> log_w) {
  if (log_w.empty()) return -std::numeric_limits<double>::infinity();
  const double max_w = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(max_w)) return max_w;
  double sum = 0.0;
  for (double w : log_w) sum += std::exp(w - max_w);
  return max_w + std::log(sum);
}

namespace {

double checked_max(std::span<const double> log_w) {
  if (log_w.empty()) throw InputError("empty weight vector");
  double max_w = -std::numeric_limits<double>::infinity();
  for (double w : log_w) {
    if (std::isnan(w) || w == std::numeric_limits<double>::infinity()) {
      throw NumericalError("log weight is NaN or +infinity");
    }
    max_w = std::max(max_w, w);
  }
  if (max_w == -std::numeric_limits<double>::infinity()) {
    throw DegenerateWeightsError("all " + std::to_string(log_w.size()) + " weights are zero");
  }
  return max_w;
}

}  // namespace

std::vector<double> cumulative_weights(std::span<const double> log_w) {
  const double max_w = checked_max(log_w);
  std::vector<double> cumulative(log_w.size());
  double running = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    running += std::exp(log_w[i] - max_w);
    cumulative[i] = running;
  }
  const double inv_total = 1.0 / running;
  for (double& c : cumulative) c *= inv_total;
  return cumulative;
}

std::vector<double> normalized_weights(std::span<const double> log_w) {
  const double max_w = checked_max(log_w);
  std::vector<double> p(log_w.size());
  double total = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    p[i] = std::exp(log_w[i] - max_w);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

std::size_t sample_categorical(std::span<const double> cumulative, double u) noexcept {
  const double target = u * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  if (it == cumulative.end()) {
    // u * total rounded up to total: step back to the last positive weight.
    --it;
    while (it != cumulative.begin() && *(it - 1) == *it) --it;
  }
  return static_cast<std::size_t>(it - cumulative.begin());
}

ParticleCloud::ParticleCloud(const FeynmanKacModel& model, std::size_t time, StateArray positions)
    : time_(time), positions_(std::move(positions)) {
  if (positions_.size() == 0) throw InputError("particle cloud must contain at least one particle");
  if (positions_.dim() != model.state_dim()) throw InputError("particle dimension does not match the model");
  log_potentials_.resize(positions_.size());
  double max_w = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    log_potentials_[i] = model.log_potential(time_, positions_[i]);
    if (std::isnan(log_potentials_[i])) throw NumericalError("log-potential is NaN");
    max_w = std::max(max_w, log_potentials_[i]);
  }
  if (max_w > -std::numeric_limits<double>::infinity()) cumulative_ = cumulative_weights(log_potentials_);
}

std::vector<double> ParticleCloud::selection_probabilities() const {
  return normalized_weights(log_potentials_);
}

std::size_t ParticleCloud::select(double u) const {
  if (degenerate()) {
    throw DegenerateWeightsError("every potential of the cloud at time " + std::to_string(time_) +
                                 " is zero");
  }
  return sample_categorical(cumulative_, u);
}

ParticleCloud init_cloud(const FeynmanKacModel& model, std::size_t num_particles, Rng& rng) {
  if (num_particles == 0) throw InputError("number of particles must be positive");
  StateArray positions(num_particles, model.state_dim());
  const std::uint64_t salt = rng();
  for (std::size_t i = 0; i < num_particles; ++i) {
    Rng stream = Rng::substream(salt, i);
    model.sample_initial(stream, positions[i]);
  }
  return ParticleCloud(model, 0, std::move(positions));
}

namespace {

// Fills every slot except `skip` with a draw from Phi_m(mu(cloud)).
StateArray mutate_selected(const FeynmanKacModel& model, const ParticleCloud& cloud, Rng& rng,
                           std::size_t skip, std::vector<std::size_t>* ancestors) {
  const std::size_t n = cloud.size();
  if (cloud.degenerate()) {
    throw DegenerateWeightsError("every potential of the cloud at time " +
                                 std::to_string(cloud.time()) + " is zero");
  }
  StateArray next(n, cloud.dim());
  if (ancestors) ancestors->assign(n, std::numeric_limits<std::size_t>::max());
  const std::uint64_t salt = rng();
  for (std::size_t i = 0; i < n; ++i) {
    if (i == skip) continue;
    Rng stream = Rng::substream(salt, i);
    const std::size_t a = cloud.select(stream.uniform());
    model.sample_mutation(stream, cloud.time(), cloud.position(a), next[i]);
    if (ancestors) (*ancestors)[i] = a;
  }
  return next;
}

}  // namespace

ParticleCloud propagate(const FeynmanKacModel& model, const ParticleCloud& cloud, Rng& rng,
                        std::vector<std::size_t>* ancestors) {
  StateArray next = mutate_selected(model, cloud, rng, std::numeric_limits<std::size_t>::max(), ancestors);
  return ParticleCloud(model, cloud.time() + 1, std::move(next));
}

ConditionalCloud propagate_conditional(const FeynmanKacModel& model, const ParticleCloud& cloud,
                                       State z_next, Rng& rng, std::vector<std::size_t>* ancestors) {
  if (z_next.size() != model.state_dim()) throw InputError("frozen state dimension mismatch");
  const std::size_t slot = rng.uniform_index(cloud.size());
  StateArray next = mutate_selected(model, cloud, rng, slot, ancestors);
  std::copy(z_next.begin(), z_next.end(), next[slot].begin());
  return {ParticleCloud(model, cloud.time() + 1, std::move(next)), slot};
}

ConditionalCloud init_cloud_conditional(const FeynmanKacModel& model, std::size_t num_particles,
                                        State z0, Rng& rng) {
  if (num_particles == 0) throw InputError("number of particles must be positive");
  if (z0.size() != model.state_dim()) throw InputError("frozen state dimension mismatch");
  const std::size_t slot = rng.uniform_index(num_particles);
  StateArray positions(num_particles, model.state_dim());
  const std::uint64_t salt = rng();
  for (std::size_t i = 0; i < num_particles; ++i) {
    if (i == slot) continue;
    Rng stream = Rng::substream(salt, i);
    model.sample_initial(stream, positions[i]);
  }
  std::copy(z0.begin(), z0.end(), positions[slot].begin());
  return {ParticleCloud(model, 0, std::move(positions)), slot};
}

}  // namespace ppg
