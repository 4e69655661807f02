#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ppg/fk_model.hpp"
#include "ppg/smc.hpp"

namespace ppg {

// How backward indices are drawn. kAuto picks accept-reject whenever the
// model advertises a finite transition density bound at that step.
enum class BackwardMode { kExact, kAcceptReject, kAuto };

const char* to_string(BackwardMode mode) noexcept;
BackwardMode parse_backward_mode(std::string_view name);
BackwardMode resolve_backward_mode(const FeynmanKacModel& model, std::size_t m, BackwardMode requested);

// Backward kernel induced by `source` (time m) at target x_{m+1}: index l
// has weight q_m(xi_l, x_{m+1}) = g_m(xi_l) m_m(xi_l, x_{m+1}).
class BackwardContext {
 public:
  BackwardContext(const FeynmanKacModel& model, const ParticleCloud& source, State target);

  const FeynmanKacModel& model() const noexcept { return *model_; }
  const ParticleCloud& source() const noexcept { return *source_; }
  State target() const noexcept { return target_; }
  std::size_t time() const noexcept { return source_->time(); }

  void log_q_values(std::span<double> out) const;
  std::vector<double> log_q_values() const;

 private:
  const FeynmanKacModel* model_;
  const ParticleCloud* source_;
  State target_;
};

// Normalised backward probabilities; sums to one within 1e-12.
std::vector<double> backward_probabilities(const BackwardContext& ctx);

// Exact categorical sampler over the backward weights. Building it costs
// O(N); each draw is O(log N). `scratch` is reused across targets.
class ExactBackwardSampler {
 public:
  ExactBackwardSampler() = default;
  void reset(const BackwardContext& ctx);
  std::size_t draw(Rng& rng) const { return sample_categorical(cumulative_, rng.uniform()); }

 private:
  std::vector<double> cumulative_;
};

std::size_t sample_backward_exact(const BackwardContext& ctx, Rng& rng);

struct AcceptRejectStats {
  std::size_t trials = 0;
  bool fell_back = false;
};

// ceil(sqrt(N)).
std::size_t default_max_trials(std::size_t num_particles) noexcept;

// Candidates are drawn by the source cloud's selection weights and accepted
// with probability m_m(candidate, target) / sigma_bar_m. After `max_trials`
// rejections the exact sampler takes over; either way the returned index
// follows backward_probabilities exactly.
std::size_t sample_backward_ar(const BackwardContext& ctx, std::size_t max_trials, Rng& rng,
                               AcceptRejectStats* stats = nullptr);

// Mode-dispatching draw used by the smoothers.
std::size_t sample_backward(const BackwardContext& ctx, BackwardMode resolved_mode,
                            std::size_t max_trials, Rng& rng);

// FFBSi: a uniform index in the last cloud, then backward draws down to
// time 0. Clouds must be contiguous in time and share N.
Trajectory ffbsi_sample_path(const FeynmanKacModel& model, std::span<const ParticleCloud> clouds,
                             Rng& rng, BackwardMode mode = BackwardMode::kAuto);

// Forward-only FFBSm statistic update, O(N^2):
// beta'_i = sum_l p_l(i) (beta_l + h_m(xi_l, xi'_i)).
std::vector<double> ffbsm_forward_update(const FeynmanKacModel& model, const AdditiveFunctional& f,
                                         const ParticleCloud& cloud, std::span<const double> stats,
                                         const ParticleCloud& next);

}  // namespace ppg
