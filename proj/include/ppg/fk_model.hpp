#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ppg/rng.hpp"
#include "ppg/state.hpp"

namespace ppg {

// Strong-mixing bounds at one time step: potential in [potential_lower,
// potential_upper], transition density in [density_lower, density_upper].
struct MixingBounds {
  double potential_lower;
  double potential_upper;
  double density_lower;
  double density_upper;
};

// Feynman-Kac model: initial law eta_0, Markov kernels M_m with densities
// m_m, and potentials g_m. The path measure at horizon n weighs
// g_0, ..., g_{n-1}; the potential g_n does not enter eta_{0:n}.
//
// All densities and potentials are exchanged in the log domain. Callbacks
// must be pure: the only mutable state is the caller-owned Rng.
class FeynmanKacModel {
 public:
  virtual ~FeynmanKacModel() = default;

  virtual std::size_t state_dim() const noexcept = 0;

  virtual void sample_initial(Rng& rng, MutableState out) const = 0;
  virtual void sample_mutation(Rng& rng, std::size_t m, State x, MutableState out) const = 0;

  // log m_m(x, x_next).
  virtual double log_transition_density(std::size_t m, State x, State x_next) const = 0;
  // log g_m(x).
  virtual double log_potential(std::size_t m, State x) const = 0;

  // Finite upper bound on m_m, or +infinity when none is known.
  virtual double transition_density_upper(std::size_t m) const {
    (void)m;
    return std::numeric_limits<double>::infinity();
  }

  virtual std::optional<MixingBounds> bounds(std::size_t m) const {
    (void)m;
    return std::nullopt;
  }

  // Fills out[l] = log m_m(from[l], x_next). Models override this when a
  // vectorised evaluation is cheaper than per-pair virtual calls.
  virtual void log_transition_densities(std::size_t m, const StateArray& from, State x_next,
                                        std::span<double> out) const;

  // Fills out[l] = m_m(from[l], x_next); may underflow to zero.
  virtual void transition_densities(std::size_t m, const StateArray& from, State x_next,
                                    std::span<double> out) const;
};

// h_n(x_{0:n}) = sum_{m<n} term_m(x_m, x_{m+1}).
class AdditiveFunctional {
 public:
  using Term = std::function<double(State, State)>;
  using TimedTerm = std::function<double(std::size_t, State, State)>;
  // out[l] = term_m(from[l], x_next).
  using BatchTerm = std::function<void(std::size_t, const StateArray&, State, std::span<double>)>;

  AdditiveFunctional() = default;
  AdditiveFunctional(TimedTerm term, std::size_t horizon, std::vector<double> sup_norms);

  // One term per time step; sup_norms may be empty (treated as unknown).
  static AdditiveFunctional from_terms(std::vector<Term> terms, std::vector<double> sup_norms = {});
  // The same term at every step m < horizon.
  static AdditiveFunctional homogeneous(Term term, std::size_t horizon,
                                        double sup_norm = std::numeric_limits<double>::infinity());

  // alpha * f + g over the common horizon.
  static AdditiveFunctional linear_combination(double alpha, const AdditiveFunctional& f,
                                               const AdditiveFunctional& g);

  std::size_t horizon() const noexcept { return horizon_; }
  double term(std::size_t m, State x, State x_next) const { return term_(m, x, x_next); }
  void terms(std::size_t m, const StateArray& from, State x_next, std::span<double> out) const;

  // Copy with a vectorised evaluation of the same terms.
  AdditiveFunctional with_batch(BatchTerm batch) const;
  double sup_norm(std::size_t m) const;
  // sum_{m<n} ||term_m||_inf.
  double sup_norm_sum(std::size_t n) const;

 private:
  TimedTerm term_;
  BatchTerm batch_;
  std::size_t horizon_ = 0;
  std::vector<double> sup_norms_;
};

// Throws InputError unless f defines at least n terms.
void require_horizon(const AdditiveFunctional& f, std::size_t n);

double eval_additive(const AdditiveFunctional& f, const Trajectory& path);

// rho_n = max_{m<=n} (tau_hi sigma_hi) / (tau_lo sigma_lo).
double mixing_constant_rho(const FeynmanKacModel& model, std::size_t n);

// N_n = 1 + 5 rho^2 n / 2.
double critical_particle_count(double rho, std::size_t n);

// kappa_{N,n} = 1 - (1 - N_n/N) / (1 + 4n(1 + 2 rho^2)/N); DomainError when N <= N_n.
double kappa(double rho, std::size_t n, std::size_t num_particles);
double kappa(const FeynmanKacModel& model, std::size_t n, std::size_t num_particles);

}  // namespace ppg
