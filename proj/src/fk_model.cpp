#include "ppg/fk_model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace ppg {

void FeynmanKacModel::log_transition_densities(std::size_t m, const StateArray& from,
                                               State x_next, std::span<double> out) const {
  for (std::size_t l = 0; l < from.size(); ++l) out[l] = log_transition_density(m, from[l], x_next);
}

AdditiveFunctional::AdditiveFunctional(TimedTerm term, std::size_t horizon,
                                       std::vector<double> sup_norms)
    : term_(std::move(term)), horizon_(horizon), sup_norms_(std::move(sup_norms)) {
  if (!term_ && horizon_ > 0) throw InputError("additive functional has no term callable");
  if (!sup_norms_.empty() && sup_norms_.size() != horizon_) {
    throw InputError("sup_norms must have one entry per term");
  }
}

void FeynmanKacModel::transition_densities(std::size_t m, const StateArray& from, State x_next,
                                           std::span<double> out) const {
  log_transition_densities(m, from, x_next, out);
  for (double& v : out.first(from.size())) v = std::exp(v);
}

void AdditiveFunctional::terms(std::size_t m, const StateArray& from, State x_next, std::span<double> out) const {
  if (batch_) {
    batch_(m, from, x_next, out);
    return;
  }
  for (std::size_t l = 0; l < from.size(); ++l) out[l] = term_(m, from[l], x_next);
}

AdditiveFunctional AdditiveFunctional::with_batch(BatchTerm batch) const {
  AdditiveFunctional copy = *this;
  copy.batch_ = std::move(batch);
  return copy;
}

AdditiveFunctional AdditiveFunctional::from_terms(std::vector<Term> terms,
                                                  std::vector<double> sup_norms) {
  const std::size_t horizon = terms.size();
  auto table = std::make_shared<const std::vector<Term>>(std::move(terms));
  return AdditiveFunctional(
      [table](std::size_t m, State x, State y) { return (*table)[m](x, y); }, horizon,
      std::move(sup_norms));
}

AdditiveFunctional AdditiveFunctional::homogeneous(Term term, std::size_t horizon,
                                                   double sup_norm) {
  return AdditiveFunctional([term = std::move(term)](std::size_t, State x, State y) { return term(x, y); },
                            horizon, std::vector<double>(horizon, sup_norm));
}

AdditiveFunctional AdditiveFunctional::linear_combination(double alpha, const AdditiveFunctional& f,
                                                          const AdditiveFunctional& g) {
  const std::size_t horizon = std::min(f.horizon(), g.horizon());
  std::vector<double> norms(horizon);
  for (std::size_t m = 0; m < horizon; ++m) norms[m] = std::abs(alpha) * f.sup_norm(m) + g.sup_norm(m);
  return AdditiveFunctional(
      [alpha, f, g](std::size_t m, State x, State y) { return alpha * f.term(m, x, y) + g.term(m, x, y); },
      horizon, std::move(norms));
}

double AdditiveFunctional::sup_norm(std::size_t m) const {
  if (sup_norms_.empty()) return std::numeric_limits<double>::infinity();
  return sup_norms_.at(m);
}

double AdditiveFunctional::sup_norm_sum(std::size_t n) const {
  require_horizon(*this, n);
  double total = 0.0;
  for (std::size_t m = 0; m < n; ++m) total += sup_norm(m);
  return total;
}

void require_horizon(const AdditiveFunctional& f, std::size_t n) {
  if (f.horizon() < n) {
    throw InputError("additive functional defines " + std::to_string(f.horizon()) +
                     " terms but " + std::to_string(n) + " are required");
  }
}

double eval_additive(const AdditiveFunctional& f, const Trajectory& path) {
  if (path.length() == 0) throw InputError("trajectory must contain at least one state");
  const std::size_t n = path.horizon();
  require_horizon(f, n);
  double total = 0.0;
  for (std::size_t m = 0; m < n; ++m) total += f.term(m, path[m], path[m + 1]);
  return total;
}

double mixing_constant_rho(const FeynmanKacModel& model, std::size_t n) {
  double rho = 1.0;
  for (std::size_t m = 0; m <= n; ++m) {
    const auto b = model.bounds(m);
    if (!b) {
      throw UnsupportedModelError("model declares no mixing bounds at time " + std::to_string(m));
    }
    if (!(b->potential_lower > 0.0) || !(b->density_lower > 0.0) ||
        b->potential_upper < b->potential_lower || b->density_upper < b->density_lower) {
      throw UnsupportedModelError("invalid mixing bounds at time " + std::to_string(m));
    }
    rho = std::max(rho, (b->potential_upper * b->density_upper) /
                            (b->potential_lower * b->density_lower));
  }
  return rho;
}

double critical_particle_count(double rho, std::size_t n) {
  return 1.0 + 5.0 * rho * rho * static_cast<double>(n) / 2.0;
}

double kappa(double rho, std::size_t n, std::size_t num_particles) {
  if (!(rho >= 1.0)) throw DomainError("rho must be at least 1");
  const double big_n = static_cast<double>(num_particles);
  const double critical = critical_particle_count(rho, n);
  if (!(big_n > critical)) {
    throw DomainError("N = " + std::to_string(num_particles) + " does not exceed N_n = " +
                      std::to_string(critical) + "; the contraction bound is vacuous");
  }
  const double nn = static_cast<double>(n);
  return 1.0 - (1.0 - critical / big_n) / (1.0 + 4.0 * nn * (1.0 + 2.0 * rho * rho) / big_n);
}

double kappa(const FeynmanKacModel& model, std::size_t n, std::size_t num_particles) {
  return kappa(mixing_constant_rho(model, n), n, num_particles);
}

}  // namespace ppg
