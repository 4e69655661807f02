#include "ppg/paris.hpp"

#include <numeric>

namespace ppg {

ParisState paris_init(const FeynmanKacModel& model, std::size_t num_particles, Rng& rng) {
  ParticleCloud cloud = init_cloud(model, num_particles, rng);
  return {std::move(cloud), std::vector<double>(num_particles, 0.0)};
}

ParisState paris_step(const FeynmanKacModel& model, const AdditiveFunctional& f, const ParisState& state,
                      const ParisOptions& options, Rng& rng) {
  if (options.backward_draws == 0) throw InputError("PARIS needs at least one backward draw (M >= 1)");
  const std::size_t m = state.time();
  require_horizon(f, m + 1);
  const ParticleCloud& cloud = state.cloud;
  ParticleCloud next = propagate(model, cloud, rng);

  const BackwardMode mode = resolve_backward_mode(model, m, options.mode);
  const std::size_t max_trials = options.max_trials ? options.max_trials : default_max_trials(cloud.size());
  const double inv_m = 1.0 / static_cast<double>(options.backward_draws);
  std::vector<double> stats(next.size());
  ExactBackwardSampler exact;
  const std::uint64_t salt = rng();
  for (std::size_t i = 0; i < next.size(); ++i) {
    Rng stream = Rng::substream(salt, i);
    const State x = next.position(i);
    const BackwardContext ctx(model, cloud, x);
    if (mode == BackwardMode::kExact) exact.reset(ctx);
    double acc = 0.0;
    for (std::size_t j = 0; j < options.backward_draws; ++j) {
      const std::size_t l = mode == BackwardMode::kExact ? exact.draw(stream)
                                                         : sample_backward_ar(ctx, max_trials, stream);
      acc += state.stats[l] + f.term(m, cloud.position(l), x);
    }
    stats[i] = acc * inv_m;
  }
  return {std::move(next), std::move(stats)};
}

double paris_estimate(const ParisState& state) noexcept {
  if (state.stats.empty()) return 0.0;
  return std::accumulate(state.stats.begin(), state.stats.end(), 0.0) /
         static_cast<double>(state.stats.size());
}

double run_paris(const FeynmanKacModel& model, const AdditiveFunctional& f, std::size_t n,
                 std::size_t num_particles, const ParisOptions& options, Rng& rng) {
  require_horizon(f, n);
  ParisState state = paris_init(model, num_particles, rng);
  for (std::size_t m = 0; m < n; ++m) state = paris_step(model, f, state, options, rng);
  return paris_estimate(state);
}

double run_ffbsm(const FeynmanKacModel& model, const AdditiveFunctional& f, std::size_t n,
                 std::size_t num_particles, Rng& rng) {
  require_horizon(f, n);
  ParisState state = paris_init(model, num_particles, rng);
  for (std::size_t m = 0; m < n; ++m) {
    ParticleCloud next = propagate(model, state.cloud, rng);
    state.stats = ffbsm_forward_update(model, f, state.cloud, state.stats, next);
    state.cloud = std::move(next);
  }
  return paris_estimate(state);
}

}  // namespace ppg
