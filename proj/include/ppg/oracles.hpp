#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ppg/fk_model.hpp"
#include "ppg/models.hpp"
#include "ppg/rng.hpp"

namespace ppg {

// Exact Gaussian smoothing moments of a scalar LGSSM.
struct SmoothingMoments {
  std::vector<double> mean;      // E[x_m | z], m = 0..n
  std::vector<double> variance;  // Var(x_m | z)
  std::vector<double> lag_one;   // Cov(x_m, x_{m+1} | z), m = 0..n-1
};

// Kalman filter followed by the RTS smoother. NaN observations are treated
// as missing. Lag-one covariances use Cov(x_m, x_{m+1} | z) = J_m P_{m+1|n}.
SmoothingMoments kalman_rts(const Lgssm& model, std::span<const double> observations);

// Moments of the Feynman-Kac path measure eta_{0:n} built from a record
// z_{0:n}: the potential of z_n does not enter, so z_n is treated as missing.
SmoothingMoments lgssm_target_moments(const Lgssm& model, std::span<const double> observations);

// E[sum_m x_m x_{m+1}] = sum_m (Cov_m + mean_m mean_{m+1}).
double exact_one_lag_expectation(const SmoothingMoments& moments);

// Exact joint draw from the smoothing law (forward filter, backward
// Gaussian conditionals). NaN observations are missing.
Trajectory sample_posterior_path(const Lgssm& model, std::span<const double> observations, Rng& rng);

// Exact draw from eta_{0:n} (z_n missing, as above).
Trajectory sample_target_path(const Lgssm& model, std::span<const double> observations, Rng& rng);

// eta_{0:n} h_n on a finite-state model, by the forward recursion of the
// backward-kernel statistics T_m h_m; O(n S^2). The functional is evaluated
// on state indices.
double discrete_exact_smoothing(const DiscreteHmm& model, std::span<const double> observations,
                                const AdditiveFunctional& f, std::size_t n);

// The same value by summing over all S^{n+1} paths; for small instances.
double discrete_enumerate_smoothing(const DiscreteHmm& model, std::span<const double> observations,
                                    const AdditiveFunctional& f, std::size_t n);

// Predictive filter eta_m (law of x_m under eta_{0:m}) as a probability vector.
std::vector<double> discrete_filter(const DiscreteHmm& model, std::span<const double> observations, std::size_t m);

}  // namespace ppg
