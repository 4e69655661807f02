#include "ppg/backward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ppg {

const char* to_string(BackwardMode mode) noexcept {
  switch (mode) {
    case BackwardMode::kExact: return "exact";
    case BackwardMode::kAcceptReject: return "accept_reject";
    case BackwardMode::kAuto: return "auto";
  }
  return "auto";
}

BackwardMode parse_backward_mode(std::string_view name) {
  if (name == "exact") return BackwardMode::kExact;
  if (name == "accept_reject") return BackwardMode::kAcceptReject;
  if (name == "auto") return BackwardMode::kAuto;
  throw InputError("unknown backward mode '" + std::string(name) +
                   "' (expected exact, accept_reject or auto)");
}

BackwardMode resolve_backward_mode(const FeynmanKacModel& model, std::size_t m, BackwardMode requested) {
  const bool bounded = std::isfinite(model.transition_density_upper(m));
  switch (requested) {
    case BackwardMode::kExact: return BackwardMode::kExact;
    case BackwardMode::kAuto: return bounded ? BackwardMode::kAcceptReject : BackwardMode::kExact;
    case BackwardMode::kAcceptReject:
      if (!bounded) {
        throw ModelContractError("accept-reject backward sampling needs a finite transition "
                                 "density bound at time " + std::to_string(m));
      }
      return BackwardMode::kAcceptReject;
  }
  return BackwardMode::kExact;
}

BackwardContext::BackwardContext(const FeynmanKacModel& model, const ParticleCloud& source, State target)
    : model_(&model), source_(&source), target_(target) {
  if (target.size() != source.dim()) throw InputError("backward target dimension mismatch");
}

void BackwardContext::log_q_values(std::span<double> out) const {
  model_->log_transition_densities(time(), source_->positions(), target_, out);
  const auto log_g = source_->log_potentials();
  for (std::size_t l = 0; l < out.size(); ++l) out[l] += log_g[l];
}

std::vector<double> BackwardContext::log_q_values() const {
  std::vector<double> out(source_->size());
  log_q_values(out);
  return out;
}

std::vector<double> backward_probabilities(const BackwardContext& ctx) {
  return normalized_weights(ctx.log_q_values());
}

void ExactBackwardSampler::reset(const BackwardContext& ctx) {
  cumulative_.resize(ctx.source().size());
  ctx.log_q_values(cumulative_);
  cumulative_ = cumulative_weights(cumulative_);
}

std::size_t sample_backward_exact(const BackwardContext& ctx, Rng& rng) {
  ExactBackwardSampler sampler;
  sampler.reset(ctx);
  return sampler.draw(rng);
}

std::size_t default_max_trials(std::size_t num_particles) noexcept {
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(num_particles))));
}

std::size_t sample_backward_ar(const BackwardContext& ctx, std::size_t max_trials, Rng& rng,
                               AcceptRejectStats* stats) {
  const ParticleCloud& source = ctx.source();
  const double upper = ctx.model().transition_density_upper(ctx.time());
  if (!(upper > 0.0) || !std::isfinite(upper)) {
    throw ModelContractError("accept-reject backward sampling needs a finite positive transition "
                             "density bound at time " + std::to_string(ctx.time()));
  }
  const double log_upper = std::log(upper);
  const double slack = 1e-9 * std::max(1.0, std::abs(log_upper));
  for (std::size_t trial = 1; trial <= max_trials; ++trial) {
    const std::size_t candidate = source.select(rng.uniform());
    const double log_m = ctx.model().log_transition_density(ctx.time(), source.position(candidate), ctx.target());
    if (log_m > log_upper + slack) {
      throw ModelContractError("transition density exceeds its declared upper bound at time " +
                               std::to_string(ctx.time()));
    }
    if (rng.uniform() < std::exp(log_m - log_upper)) {
      if (stats) *stats = {trial, false};
      return candidate;
    }
  }
  if (stats) *stats = {max_trials, true};
  return sample_backward_exact(ctx, rng);
}

std::size_t sample_backward(const BackwardContext& ctx, BackwardMode resolved_mode,
                            std::size_t max_trials, Rng& rng) {
  if (resolved_mode == BackwardMode::kAcceptReject) return sample_backward_ar(ctx, max_trials, rng);
  return sample_backward_exact(ctx, rng);
}

Trajectory ffbsi_sample_path(const FeynmanKacModel& model, std::span<const ParticleCloud> clouds,
                             Rng& rng, BackwardMode mode) {
  if (clouds.empty()) throw InputError("FFBSi needs at least one cloud");
  const std::size_t n = clouds.size() - 1;
  const std::size_t big_n = clouds.front().size();
  for (std::size_t m = 0; m <= n; ++m) {
    if (clouds[m].size() != big_n) throw InputError("FFBSi clouds must share the particle count");
    if (clouds[m].time() != clouds.front().time() + m) throw InputError("FFBSi clouds must be contiguous in time");
  }
  StateArray states(n + 1, model.state_dim());
  std::size_t index = rng.uniform_index(big_n);
  auto copy_into = [&](std::size_t m, std::size_t i) {
    const State x = clouds[m].position(i);
    std::copy(x.begin(), x.end(), states[m].begin());
  };
  copy_into(n, index);
  const std::size_t max_trials = default_max_trials(big_n);
  for (std::size_t m = n; m-- > 0;) {
    const BackwardContext ctx(model, clouds[m], clouds[m + 1].position(index));
    index = sample_backward(ctx, resolve_backward_mode(model, clouds[m].time(), mode), max_trials, rng);
    copy_into(m, index);
  }
  return Trajectory(std::move(states));
}

std::vector<double> ffbsm_forward_update(const FeynmanKacModel& model, const AdditiveFunctional& f,
                                         const ParticleCloud& cloud, std::span<const double> stats,
                                         const ParticleCloud& next) {
  const std::size_t big_n = cloud.size();
  if (stats.size() != big_n) throw InputError("statistics must have one entry per particle");
  require_horizon(f, cloud.time() + 1);
  const std::size_t m = cloud.time();
  std::vector<double> updated(next.size());
  std::vector<double> log_q(big_n);

  // Probability-domain pass: w_l = g(x_l) / max g * m(x_l, x'). Targets whose
  // weights all underflow are redone in the log domain below.
  const auto log_g = cloud.log_potentials();
  const double max_g = *std::max_element(log_g.begin(), log_g.end());
  std::vector<double> scaled_g(big_n);
  if (max_g > -std::numeric_limits<double>::infinity()) {
    for (std::size_t l = 0; l < big_n; ++l) scaled_g[l] = std::exp(log_g[l] - max_g);
  }
  std::vector<double> dens(big_n);
  std::vector<double> h(big_n);
  for (std::size_t i = 0; i < next.size(); ++i) {
    const State target = next.position(i);
    model.transition_densities(m, cloud.positions(), target, dens);
    f.terms(m, cloud.positions(), target, h);
    double total = 0.0;
    double acc = 0.0;
    for (std::size_t l = 0; l < big_n; ++l) {
      const double w = scaled_g[l] * dens[l];
      total += w;
      acc += w * (stats[l] + h[l]);
    }
    if (total > 1e-290 && std::isfinite(acc)) {
      updated[i] = acc / total;
      continue;
    }
    const BackwardContext ctx(model, cloud, target);
    ctx.log_q_values(log_q);
    const double max_q = *std::max_element(log_q.begin(), log_q.end());
    if (max_q == -std::numeric_limits<double>::infinity()) {
      throw DegenerateWeightsError("all backward weights are zero for target particle " + std::to_string(i));
    }
    total = 0.0;
    acc = 0.0;
    for (std::size_t l = 0; l < big_n; ++l) {
      const double w = std::exp(log_q[l] - max_q);
      if (w == 0.0) continue;
      total += w;
      acc += w * (stats[l] + f.term(m, cloud.position(l), target));
    }
    updated[i] = acc / total;
  }
  return updated;
}

}  // namespace ppg
