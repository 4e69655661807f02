#include "ppg/oracles.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ppg {

namespace {

struct KalmanPass {
  std::vector<double> pred_mean, pred_var;      // x_m | z_{0:m-1}
  std::vector<double> filter_mean, filter_var;  // x_m | z_{0:m}
};

KalmanPass kalman_forward(const Lgssm& model, std::span<const double> obs) {
  model.validate();
  if (obs.empty()) throw InputError("observation record must contain at least one entry");
  const std::size_t len = obs.size();
  KalmanPass k;
  k.pred_mean.resize(len);
  k.pred_var.resize(len);
  k.filter_mean.resize(len);
  k.filter_var.resize(len);
  double mp = 0.0;
  double pp = model.stationary_variance();
  const double r2 = model.R * model.R;
  for (std::size_t m = 0; m < len; ++m) {
    k.pred_mean[m] = mp;
    k.pred_var[m] = pp;
    double mf = mp;
    double pf = pp;
    if (!std::isnan(obs[m])) {
      const double innovation_var = model.B * model.B * pp + r2;
      const double gain = pp * model.B / innovation_var;
      mf = mp + gain * (obs[m] - model.B * mp);
      pf = pp - gain * model.B * pp;
    }
    if (!(pf > 0.0)) throw NumericalError("non-positive filter variance at time " + std::to_string(m));
    k.filter_mean[m] = mf;
    k.filter_var[m] = pf;
    mp = model.A * mf;
    pp = model.A * model.A * pf + model.Q * model.Q;
  }
  return k;
}

std::vector<double> with_last_missing(std::span<const double> obs) {
  std::vector<double> masked(obs.begin(), obs.end());
  if (!masked.empty()) masked.back() = std::numeric_limits<double>::quiet_NaN();
  return masked;
}

void check_record(const DiscreteHmm& model, std::span<const double> obs, std::size_t n) {
  model.validate();
  if (obs.size() < n) throw InputError("observation record is shorter than the horizon");
  for (std::size_t m = 0; m < n; ++m) {
    const double z = obs[m];
    if (!(z >= 0.0) || z != std::floor(z) || z >= static_cast<double>(model.num_symbols())) {
      throw InputError("observation " + std::to_string(z) + " is not a valid symbol");
    }
  }
}

}  // namespace

SmoothingMoments kalman_rts(const Lgssm& model, std::span<const double> observations) {
  const KalmanPass k = kalman_forward(model, observations);
  const std::size_t len = observations.size();
  SmoothingMoments s;
  s.mean.resize(len);
  s.variance.resize(len);
  s.lag_one.resize(len - 1);
  s.mean[len - 1] = k.filter_mean[len - 1];
  s.variance[len - 1] = k.filter_var[len - 1];
  for (std::size_t m = len - 1; m-- > 0;) {
    const double gain = k.filter_var[m] * model.A / k.pred_var[m + 1];
    s.mean[m] = k.filter_mean[m] + gain * (s.mean[m + 1] - k.pred_mean[m + 1]);
    s.variance[m] = k.filter_var[m] + gain * gain * (s.variance[m + 1] - k.pred_var[m + 1]);
    s.lag_one[m] = gain * s.variance[m + 1];
    if (!(s.variance[m] > 0.0)) throw NumericalError("non-positive smoothed variance at time " + std::to_string(m));
  }
  return s;
}

SmoothingMoments lgssm_target_moments(const Lgssm& model, std::span<const double> observations) {
  return kalman_rts(model, with_last_missing(observations));
}

double exact_one_lag_expectation(const SmoothingMoments& moments) {
  double total = 0.0;
  for (std::size_t m = 0; m < moments.lag_one.size(); ++m) {
    total += moments.lag_one[m] + moments.mean[m] * moments.mean[m + 1];
  }
  return total;
}

Trajectory sample_posterior_path(const Lgssm& model, std::span<const double> observations, Rng& rng) {
  const KalmanPass k = kalman_forward(model, observations);
  const std::size_t len = observations.size();
  std::vector<double> xs(len);
  xs[len - 1] = k.filter_mean[len - 1] + std::sqrt(k.filter_var[len - 1]) * rng.normal();
  for (std::size_t m = len - 1; m-- > 0;) {
    const double gain = k.filter_var[m] * model.A / k.pred_var[m + 1];
    const double mean = k.filter_mean[m] + gain * (xs[m + 1] - k.pred_mean[m + 1]);
    const double var = k.filter_var[m] - gain * model.A * k.filter_var[m];
    xs[m] = mean + std::sqrt(var) * rng.normal();
  }
  return Trajectory::scalar(std::move(xs));
}

Trajectory sample_target_path(const Lgssm& model, std::span<const double> observations, Rng& rng) {
  return sample_posterior_path(model, with_last_missing(observations), rng);
}

double discrete_exact_smoothing(const DiscreteHmm& model, std::span<const double> observations,
                                const AdditiveFunctional& f, std::size_t n) {
  check_record(model, observations, n);
  require_horizon(f, n);
  const std::size_t s = model.num_states();
  std::vector<double> filter = model.initial;
  std::vector<double> stat(s, 0.0);
  std::vector<double> next_filter(s);
  std::vector<double> next_stat(s);
  double a_state[1];
  double b_state[1];
  for (std::size_t m = 0; m < n; ++m) {
    const auto z = static_cast<std::size_t>(observations[m]);
    double norm = 0.0;
    for (std::size_t b = 0; b < s; ++b) {
      double mass = 0.0;
      double acc = 0.0;
      b_state[0] = static_cast<double>(b);
      for (std::size_t a = 0; a < s; ++a) {
        a_state[0] = static_cast<double>(a);
        const double w = filter[a] * model.emission[a][z] * model.transition[a][b];
        mass += w;
        acc += w * (stat[a] + f.term(m, State(a_state), State(b_state)));
      }
      next_filter[b] = mass;
      next_stat[b] = acc / mass;
      norm += mass;
    }
    for (std::size_t b = 0; b < s; ++b) next_filter[b] /= norm;
    filter.swap(next_filter);
    stat.swap(next_stat);
  }
  double total = 0.0;
  for (std::size_t a = 0; a < s; ++a) total += filter[a] * stat[a];
  return total;
}

double discrete_enumerate_smoothing(const DiscreteHmm& model, std::span<const double> observations,
                                    const AdditiveFunctional& f, std::size_t n) {
  check_record(model, observations, n);
  require_horizon(f, n);
  const std::size_t s = model.num_states();
  const double paths = std::pow(static_cast<double>(s), static_cast<double>(n + 1));
  if (paths > 1e7) throw InputError("too many paths to enumerate");
  std::vector<std::size_t> idx(n + 1, 0);
  std::vector<double> xs(n + 1);
  double weight_sum = 0.0;
  double value_sum = 0.0;
  while (true) {
    double w = model.initial[idx[0]];
    for (std::size_t m = 0; m < n; ++m) {
      w *= model.emission[idx[m]][static_cast<std::size_t>(observations[m])] * model.transition[idx[m]][idx[m + 1]];
    }
    for (std::size_t m = 0; m <= n; ++m) xs[m] = static_cast<double>(idx[m]);
    weight_sum += w;
    value_sum += w * eval_additive(f, Trajectory::scalar(xs));
    std::size_t pos = 0;
    while (pos <= n && ++idx[pos] == s) idx[pos++] = 0;
    if (pos > n) break;
  }
  return value_sum / weight_sum;
}

std::vector<double> discrete_filter(const DiscreteHmm& model, std::span<const double> observations, std::size_t m) {
  check_record(model, observations, m);
  const std::size_t s = model.num_states();
  std::vector<double> filter = model.initial;
  for (std::size_t t = 0; t < m; ++t) {
    const auto z = static_cast<std::size_t>(observations[t]);
    std::vector<double> next(s, 0.0);
    double norm = 0.0;
    for (std::size_t a = 0; a < s; ++a) {
      for (std::size_t b = 0; b < s; ++b) next[b] += filter[a] * model.emission[a][z] * model.transition[a][b];
    }
    for (double v : next) norm += v;
    for (double& v : next) v /= norm;
    filter.swap(next);
  }
  return filter;
}

}  // namespace ppg
