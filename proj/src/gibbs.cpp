#include "ppg/gibbs.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ppg/backward.hpp"

namespace ppg {

PathStore::PathStore(const ParticleCloud& cloud)
    : size_(cloud.size()), length_(1), dim_(cloud.dim()) {
  const auto flat = cloud.positions().flat();
  data_.assign(flat.begin(), flat.end());
}

Trajectory PathStore::trajectory(std::size_t i) const {
  const auto first = data_.begin() + static_cast<std::ptrdiff_t>(i * length_ * dim_);
  return Trajectory(StateArray(dim_, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(length_ * dim_))));
}

PathStore PathStore::extended(std::span<const std::size_t> ancestors, const ParticleCloud& next) const {
  if (ancestors.size() != next.size()) throw InputError("one ancestor per new particle is required");
  PathStore out;
  out.size_ = next.size();
  out.length_ = length_ + 1;
  out.dim_ = dim_;
  out.data_.resize(out.size_ * out.length_ * dim_);
  const std::size_t old_row = length_ * dim_;
  for (std::size_t i = 0; i < out.size_; ++i) {
    if (ancestors[i] >= size_) throw InputError("ancestor index out of range");
    double* dst = out.data_.data() + i * out.length_ * dim_;
    const double* src = data_.data() + ancestors[i] * old_row;
    std::copy(src, src + old_row, dst);
    const State x = next.position(i);
    std::copy(x.begin(), x.end(), dst + old_row);
  }
  return out;
}

CondParisState cond_paris_init(const FeynmanKacModel& model, std::size_t num_particles, State z0, Rng& rng) {
  ConditionalCloud init = init_cloud_conditional(model, num_particles, z0, rng);
  PathStore paths(init.cloud);
  return {std::move(init.cloud), std::move(paths), std::vector<double>(num_particles, 0.0), init.frozen_slot};
}

CondParisState cond_paris_apply_draws(const AdditiveFunctional& f, const CondParisState& state,
                                      ConditionalCloud next,
                                      std::span<const std::size_t> draws, std::size_t backward_draws) {
  const std::size_t big_n = next.cloud.size();
  if (backward_draws == 0) throw InputError("conditional PARIS needs at least one backward draw (M >= 1)");
  if (draws.size() != big_n * backward_draws) throw InputError("expected N x M backward draws");
  const std::size_t m = state.time();
  require_horizon(f, m + 1);
  const double inv_m = 1.0 / static_cast<double>(backward_draws);
  std::vector<std::size_t> ancestors(big_n);
  std::vector<double> stats(big_n);
  for (std::size_t i = 0; i < big_n; ++i) {
    const State x = next.cloud.position(i);
    const auto row = draws.subspan(i * backward_draws, backward_draws);
    ancestors[i] = row[0];
    double acc = 0.0;
    for (const std::size_t l : row) {
      if (l >= state.cloud.size()) throw InputError("backward index out of range");
      acc += state.stats[l] + f.term(m, state.cloud.position(l), x);
    }
    stats[i] = acc * inv_m;
  }
  PathStore paths = state.paths.extended(ancestors, next.cloud);
  return {std::move(next.cloud), std::move(paths), std::move(stats), next.frozen_slot};
}

CondParisState cond_paris_step(const FeynmanKacModel& model, const AdditiveFunctional& f,
                               const CondParisState& state, State z_next, const ParisOptions& options,
                               Rng& rng) {
  if (options.backward_draws == 0) throw InputError("conditional PARIS needs at least one backward draw (M >= 1)");
  const std::size_t m = state.time();
  require_horizon(f, m + 1);
  const ParticleCloud& cloud = state.cloud;
  ConditionalCloud next = propagate_conditional(model, cloud, z_next, rng);

  const BackwardMode mode = resolve_backward_mode(model, m, options.mode);
  const std::size_t max_trials = options.max_trials ? options.max_trials : default_max_trials(cloud.size());
  const std::size_t big_m = options.backward_draws;
  std::vector<std::size_t> draws(next.cloud.size() * big_m);
  ExactBackwardSampler exact;
  const std::uint64_t salt = rng();
  for (std::size_t i = 0; i < next.cloud.size(); ++i) {
    Rng stream = Rng::substream(salt, i);
    const BackwardContext ctx(model, cloud, next.cloud.position(i));
    if (mode == BackwardMode::kExact) exact.reset(ctx);
    for (std::size_t j = 0; j < big_m; ++j) {
      draws[i * big_m + j] = mode == BackwardMode::kExact ? exact.draw(stream)
                                                          : sample_backward_ar(ctx, max_trials, stream);
    }
  }
  return cond_paris_apply_draws(f, state, std::move(next), draws, big_m);
}

SweepResult ppg_sweep(const FeynmanKacModel& model, const AdditiveFunctional& f, std::size_t num_particles,
                      const Trajectory& zeta, const ParisOptions& options, Rng& rng) {
  if (zeta.length() == 0) throw InputError("conditioning path must contain at least one state");
  const std::size_t n = zeta.horizon();
  require_horizon(f, n);
  CondParisState state = cond_paris_init(model, num_particles, zeta[0], rng);
  for (std::size_t m = 0; m < n; ++m) state = cond_paris_step(model, f, state, zeta[m + 1], options, rng);
  const double estimate =
      std::accumulate(state.stats.begin(), state.stats.end(), 0.0) / static_cast<double>(num_particles);
  return {state.paths.trajectory(rng.uniform_index(num_particles)), estimate};
}

double rollout_estimate(std::span<const double> per_iteration, std::size_t k0) {
  if (k0 >= per_iteration.size()) throw InputError("burn-in must be smaller than the number of iterations");
  const auto kept = per_iteration.subspan(k0);
  return std::accumulate(kept.begin(), kept.end(), 0.0) / static_cast<double>(kept.size());
}

PpgRun run_ppg(const FeynmanKacModel& model, const AdditiveFunctional& f, std::size_t num_particles,
               std::size_t k, std::size_t k0, const Trajectory& init_zeta, const ParisOptions& options,
               Rng& rng) {
  if (k0 >= k) {
    throw InputError("burn-in k0 = " + std::to_string(k0) + " must be smaller than k = " + std::to_string(k));
  }
  PpgRun run{0.0, {}, init_zeta};
  run.per_iteration.reserve(k);
  for (std::size_t ell = 1; ell <= k; ++ell) {
    SweepResult sweep = ppg_sweep(model, f, num_particles, run.final_zeta, options, rng);
    run.per_iteration.push_back(sweep.estimate);
    run.final_zeta = std::move(sweep.new_zeta);
  }
  run.rollout = rollout_estimate(run.per_iteration, k0);
  return run;
}

Trajectory default_init_path(const FeynmanKacModel& model, std::size_t n, std::size_t num_particles,
                             Rng& rng, BackwardMode mode) {
  std::vector<ParticleCloud> clouds;
  clouds.reserve(n + 1);
  clouds.push_back(init_cloud(model, num_particles, rng));
  for (std::size_t m = 0; m < n; ++m) clouds.push_back(propagate(model, clouds.back(), rng));
  return ffbsi_sample_path(model, clouds, rng, mode);
}

}  // namespace ppg
