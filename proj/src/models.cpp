#include "ppg/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ppg/smc.hpp"

namespace ppg {

namespace {

const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double gaussian_log_density(double x, double mean, double log_norm, double inv_two_var) {
  const double d = x - mean;
  return -log_norm - d * d * inv_two_var;
}

void check_time(std::size_t m, const std::vector<double>& observations) {
  if (m >= observations.size()) {
    throw InputError("no observation at time " + std::to_string(m) + " (record has " +
                     std::to_string(observations.size()) + " entries)");
  }
}

std::size_t as_index(double value, std::size_t bound, const char* what) {
  if (!(value >= 0.0) || value != std::floor(value) || value >= static_cast<double>(bound)) {
    throw InputError(std::string(what) + " " + std::to_string(value) + " is not a valid index");
  }
  return static_cast<std::size_t>(value);
}

void check_stochastic(const std::vector<double>& row, const char* what) {
  double total = 0.0;
  for (double p : row) {
    if (!(p > 0.0)) throw InputError(std::string(what) + " entries must be strictly positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError(std::string(what) + " rows must sum to one");
}

std::vector<double> cumulative_row(const std::vector<double>& row) {
  std::vector<double> cumulative(row.size());
  std::partial_sum(row.begin(), row.end(), cumulative.begin());
  return cumulative;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, res.ptr};
}

void Lgssm::validate() const {
  if (!(std::abs(A) < 1.0)) throw InputError("LGSSM needs |A| < 1 for the stationary initial law");
  if (!(Q > 0.0) || !(R > 0.0)) throw InputError("LGSSM needs Q > 0 and R > 0");
  if (!std::isfinite(B)) throw InputError("LGSSM coefficient B must be finite");
}

void StochVol::validate() const {
  if (!(std::abs(phi) < 1.0)) throw InputError("stochastic volatility needs |phi| < 1");
  if (!(sigma > 0.0) || !(beta > 0.0)) throw InputError("stochastic volatility needs sigma > 0 and beta > 0");
}

void DiscreteHmm::validate() const {
  const std::size_t s = num_states();
  if (s == 0) throw InputError("discrete HMM needs at least one state");
  for (const auto& row : transition) {
    if (row.size() != s) throw InputError("transition matrix must be S x S");
    check_stochastic(row, "transition");
  }
  if (emission.size() != s) throw InputError("emission matrix must have one row per state");
  for (const auto& row : emission) {
    if (row.size() != num_symbols() || row.empty()) throw InputError("emission rows must share a positive length");
    check_stochastic(row, "emission");
  }
  if (values.size() != s) throw InputError("discrete HMM needs one value per state");
  if (initial.size() != s) throw InputError("initial law must have one entry per state");
  check_stochastic(initial, "initial law");
}

DiscreteHmm DiscreteHmm::with_defaults(std::vector<std::vector<double>> transition,
                                       std::vector<std::vector<double>> emission) {
  DiscreteHmm hmm{std::move(transition), std::move(emission), {}, {}};
  const std::size_t s = hmm.num_states();
  hmm.initial.assign(s, 1.0 / static_cast<double>(s));
  hmm.values.resize(s);
  std::iota(hmm.values.begin(), hmm.values.end(), 0.0);
  return hmm;
}

std::string model_name(const ModelSpec& spec) {
  struct Visitor {
    std::string operator()(const Lgssm&) const { return "lgssm"; }
    std::string operator()(const StochVol&) const { return "stochvol"; }
    std::string operator()(const DiscreteHmm&) const { return "discrete"; }
  };
  return std::visit(Visitor{}, spec);
}

SimulatedRecord simulate(const Lgssm& model, std::size_t n, Rng& rng) {
  model.validate();
  SimulatedRecord rec;
  rec.states.resize(n + 1);
  rec.observations.resize(n + 1);
  double x = std::sqrt(model.stationary_variance()) * rng.normal();
  for (std::size_t m = 0; m <= n; ++m) {
    if (m > 0) x = model.A * x + model.Q * rng.normal();
    rec.states[m] = x;
    rec.observations[m] = model.B * x + model.R * rng.normal();
  }
  return rec;
}

SimulatedRecord simulate(const StochVol& model, std::size_t n, Rng& rng) {
  model.validate();
  SimulatedRecord rec;
  rec.states.resize(n + 1);
  rec.observations.resize(n + 1);
  double x = std::sqrt(model.stationary_variance()) * rng.normal();
  for (std::size_t m = 0; m <= n; ++m) {
    if (m > 0) x = model.phi * x + model.sigma * rng.normal();
    rec.states[m] = x;
    rec.observations[m] = model.beta * std::exp(x / 2.0) * rng.normal();
  }
  return rec;
}

SimulatedRecord simulate(const DiscreteHmm& model, std::size_t n, Rng& rng) {
  model.validate();
  SimulatedRecord rec;
  rec.states.resize(n + 1);
  rec.observations.resize(n + 1);
  std::size_t s = sample_categorical(cumulative_row(model.initial), rng.uniform());
  for (std::size_t m = 0; m <= n; ++m) {
    if (m > 0) s = sample_categorical(cumulative_row(model.transition[s]), rng.uniform());
    rec.states[m] = static_cast<double>(s);
    rec.observations[m] = static_cast<double>(sample_categorical(cumulative_row(model.emission[s]), rng.uniform()));
  }
  return rec;
}

SimulatedRecord simulate(const ModelSpec& spec, std::size_t n, Rng& rng) {
  return std::visit([&](const auto& model) { return simulate(model, n, rng); }, spec);
}

// ---------------------------------------------------------------------------
// LGSSM

LgssmFeynmanKac::LgssmFeynmanKac(Lgssm params, std::vector<double> observations)
    : params_(params), observations_(std::move(observations)) {
  params_.validate();
  init_sd_ = std::sqrt(params_.stationary_variance());
  log_norm_q_ = kLogSqrt2Pi + std::log(params_.Q);
  log_norm_r_ = kLogSqrt2Pi + std::log(params_.R);
}

void LgssmFeynmanKac::sample_initial(Rng& rng, MutableState out) const { out[0] = init_sd_ * rng.normal(); }

void LgssmFeynmanKac::sample_mutation(Rng& rng, std::size_t, State x, MutableState out) const {
  out[0] = params_.A * x[0] + params_.Q * rng.normal();
}

double LgssmFeynmanKac::log_transition_density(std::size_t, State x, State x_next) const {
  return gaussian_log_density(x_next[0], params_.A * x[0], log_norm_q_, 0.5 / (params_.Q * params_.Q));
}

double LgssmFeynmanKac::log_potential(std::size_t m, State x) const {
  check_time(m, observations_);
  return gaussian_log_density(observations_[m], params_.B * x[0], log_norm_r_, 0.5 / (params_.R * params_.R));
}

double LgssmFeynmanKac::transition_density_upper(std::size_t) const { return std::exp(-log_norm_q_); }

void LgssmFeynmanKac::log_transition_densities(std::size_t, const StateArray& from, State x_next,
                                               std::span<double> out) const {
  const auto xs = from.flat();
  const double a = params_.A;
  const double y = x_next[0];
  const double inv_two_var = 0.5 / (params_.Q * params_.Q);
  const double log_norm = log_norm_q_;
  for (std::size_t l = 0; l < xs.size(); ++l) {
    const double d = y - a * xs[l];
    out[l] = -log_norm - d * d * inv_two_var;
  }
}

// ---------------------------------------------------------------------------
// Stochastic volatility

StochVolFeynmanKac::StochVolFeynmanKac(StochVol params, std::vector<double> observations)
    : params_(params), observations_(std::move(observations)) {
  params_.validate();
  init_sd_ = std::sqrt(params_.stationary_variance());
  log_norm_sigma_ = kLogSqrt2Pi + std::log(params_.sigma);
}

void StochVolFeynmanKac::sample_initial(Rng& rng, MutableState out) const { out[0] = init_sd_ * rng.normal(); }

void StochVolFeynmanKac::sample_mutation(Rng& rng, std::size_t, State x, MutableState out) const {
  out[0] = params_.phi * x[0] + params_.sigma * rng.normal();
}

double StochVolFeynmanKac::log_transition_density(std::size_t, State x, State x_next) const {
  return gaussian_log_density(x_next[0], params_.phi * x[0], log_norm_sigma_,
                              0.5 / (params_.sigma * params_.sigma));
}

double StochVolFeynmanKac::log_potential(std::size_t m, State x) const {
  check_time(m, observations_);
  // Z | X = x ~ N(0, beta^2 exp(x)).
  const double z = observations_[m];
  return -kLogSqrt2Pi - std::log(params_.beta) - 0.5 * x[0] -
         z * z * std::exp(-x[0]) / (2.0 * params_.beta * params_.beta);
}

double StochVolFeynmanKac::transition_density_upper(std::size_t) const { return std::exp(-log_norm_sigma_); }

void StochVolFeynmanKac::log_transition_densities(std::size_t, const StateArray& from, State x_next,
                                                  std::span<double> out) const {
  const auto xs = from.flat();
  const double inv_two_var = 0.5 / (params_.sigma * params_.sigma);
  for (std::size_t l = 0; l < xs.size(); ++l) {
    const double d = x_next[0] - params_.phi * xs[l];
    out[l] = -log_norm_sigma_ - d * d * inv_two_var;
  }
}

// ---------------------------------------------------------------------------
// Discrete HMM

DiscreteHmmFeynmanKac::DiscreteHmmFeynmanKac(DiscreteHmm params, std::vector<double> observations)
    : params_(std::move(params)), observations_(std::move(observations)) {
  params_.validate();
  const std::size_t s = params_.num_states();
  const std::size_t k = params_.num_symbols();
  for (double z : observations_) as_index(z, k, "observation symbol");
  transition_.resize(s * s);
  log_transition_.resize(s * s);
  log_emission_.resize(s * k);
  max_transition_ = 0.0;
  min_transition_ = 1.0;
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = 0; b < s; ++b) {
      const double p = params_.transition[a][b];
      transition_[a * s + b] = p;
      log_transition_[a * s + b] = std::log(p);
      max_transition_ = std::max(max_transition_, p);
      min_transition_ = std::min(min_transition_, p);
    }
    for (std::size_t z = 0; z < k; ++z) log_emission_[a * k + z] = std::log(params_.emission[a][z]);
    cumulative_rows_.push_back(cumulative_row(params_.transition[a]));
  }
  cumulative_initial_ = cumulative_row(params_.initial);
}

std::size_t DiscreteHmmFeynmanKac::symbol(std::size_t m) const {
  check_time(m, observations_);
  return static_cast<std::size_t>(observations_[m]);
}

void DiscreteHmmFeynmanKac::sample_initial(Rng& rng, MutableState out) const {
  out[0] = static_cast<double>(sample_categorical(cumulative_initial_, rng.uniform()));
}

void DiscreteHmmFeynmanKac::sample_mutation(Rng& rng, std::size_t, State x, MutableState out) const {
  const std::size_t s = as_index(x[0], params_.num_states(), "state");
  out[0] = static_cast<double>(sample_categorical(cumulative_rows_[s], rng.uniform()));
}

double DiscreteHmmFeynmanKac::log_transition_density(std::size_t, State x, State x_next) const {
  const std::size_t s = params_.num_states();
  return log_transition_[as_index(x[0], s, "state") * s + as_index(x_next[0], s, "state")];
}

double DiscreteHmmFeynmanKac::log_potential(std::size_t m, State x) const {
  const std::size_t z = symbol(m);
  return log_emission_[as_index(x[0], params_.num_states(), "state") * params_.num_symbols() + z];
}

double DiscreteHmmFeynmanKac::transition_density_upper(std::size_t) const { return max_transition_; }

std::optional<MixingBounds> DiscreteHmmFeynmanKac::bounds(std::size_t m) const {
  const std::size_t z = symbol(m);
  double lo = 1.0;
  double hi = 0.0;
  for (const auto& row : params_.emission) {
    lo = std::min(lo, row[z]);
    hi = std::max(hi, row[z]);
  }
  return MixingBounds{lo, hi, min_transition_, max_transition_};
}

void DiscreteHmmFeynmanKac::log_transition_densities(std::size_t, const StateArray& from, State x_next,
                                                     std::span<double> out) const {
  const std::size_t s = params_.num_states();
  const std::size_t to = as_index(x_next[0], s, "state");
  const auto xs = from.flat();
  for (std::size_t l = 0; l < xs.size(); ++l) {
    out[l] = log_transition_[static_cast<std::size_t>(xs[l]) * s + to];
  }
}

void DiscreteHmmFeynmanKac::transition_densities(std::size_t, const StateArray& from, State x_next,
                                                 std::span<double> out) const {
  const std::size_t s = params_.num_states();
  const std::size_t to = as_index(x_next[0], s, "state");
  const auto xs = from.flat();
  for (std::size_t l = 0; l < xs.size(); ++l) out[l] = transition_[static_cast<std::size_t>(xs[l]) * s + to];
}

LgssmFeynmanKac as_feynman_kac(const Lgssm& model, std::vector<double> observations) {
  return LgssmFeynmanKac(model, std::move(observations));
}

StochVolFeynmanKac as_feynman_kac(const StochVol& model, std::vector<double> observations) {
  return StochVolFeynmanKac(model, std::move(observations));
}

DiscreteHmmFeynmanKac as_feynman_kac(const DiscreteHmm& model, std::vector<double> observations) {
  return DiscreteHmmFeynmanKac(model, std::move(observations));
}

std::unique_ptr<FeynmanKacModel> make_feynman_kac(const ModelSpec& spec, std::vector<double> observations) {
  return std::visit(
      [&](const auto& model) -> std::unique_ptr<FeynmanKacModel> {
        using Fk = decltype(as_feynman_kac(model, {}));
        return std::make_unique<Fk>(model, std::move(observations));
      },
      spec);
}

AdditiveFunctional one_lag_functional(std::size_t n) {
  return AdditiveFunctional::homogeneous([](State a, State b) { return a[0] * b[0]; }, n)
      .with_batch([](std::size_t, const StateArray& from, State y, std::span<double> out) {
        const auto xs = from.flat();
        for (std::size_t l = 0; l < xs.size(); ++l) out[l] = xs[l] * y[0];
      });
}

AdditiveFunctional one_lag_functional(const DiscreteHmm& model, std::size_t n) {
  auto values = std::make_shared<const std::vector<double>>(model.values);
  double max_abs = 0.0;
  for (double v : model.values) max_abs = std::max(max_abs, std::abs(v));
  return AdditiveFunctional::homogeneous(
             [values](State a, State b) {
               return (*values)[static_cast<std::size_t>(a[0])] * (*values)[static_cast<std::size_t>(b[0])];
             },
             n, max_abs * max_abs)
      .with_batch([values](std::size_t, const StateArray& from, State y, std::span<double> out) {
        const auto xs = from.flat();
        const double vy = (*values)[static_cast<std::size_t>(y[0])];
        for (std::size_t l = 0; l < xs.size(); ++l) out[l] = (*values)[static_cast<std::size_t>(xs[l])] * vy;
      });
}

AdditiveFunctional one_lag_functional(const ModelSpec& spec, std::size_t n) {
  if (const auto* hmm = std::get_if<DiscreteHmm>(&spec)) return one_lag_functional(*hmm, n);
  return one_lag_functional(n);
}

void write_observations_csv(std::ostream& out, const std::vector<double>& observations) {
  out << "m,z\n";
  for (std::size_t m = 0; m < observations.size(); ++m) out << m << ',' << format_double(observations[m]) << '\n';
}

void write_observations_csv(const std::string& path, const std::vector<double>& observations) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_observations_csv(out, observations);
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<double> read_observations_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("observation CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "m,z") throw InputError("observation CSV header must be 'm,z'");
  std::vector<double> obs;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InputError("malformed observation row '" + line + "'");
    std::size_t m = 0;
    double z = 0.0;
    const char* first = line.data();
    auto r1 = std::from_chars(first, first + comma, m);
    auto r2 = std::from_chars(first + comma + 1, first + line.size(), z);
    if (r1.ec != std::errc() || r2.ec != std::errc() || r2.ptr != first + line.size()) {
      throw InputError("malformed observation row '" + line + "'");
    }
    if (m != obs.size()) throw InputError("observation rows must be numbered 0, 1, 2, ...");
    obs.push_back(z);
  }
  return obs;
}

std::vector<double> read_observations_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_observations_csv(in);
}

}  // namespace ppg
