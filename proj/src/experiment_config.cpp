#include "ppg/experiment_config.hpp"

#include <algorithm>
#include <cstdio>
#include <initializer_list>
#include <set>

#include <json.hpp>

namespace ppg {

using nlohmann::json;

const char* to_string(Estimator estimator) noexcept {
  switch (estimator) {
    case Estimator::kParis: return "paris";
    case Estimator::kFfbsm: return "ffbsm";
    case Estimator::kPpg: return "ppg";
  }
  return "paris";
}

Estimator parse_estimator(std::string_view name) {
  if (name == "paris") return Estimator::kParis;
  if (name == "ffbsm") return Estimator::kFfbsm;
  if (name == "ppg") return Estimator::kPpg;
  throw InputError("unknown estimator '" + std::string(name) + "' (expected paris, ffbsm or ppg)");
}

const char* to_string(BudgetConvention convention) noexcept {
  return convention == BudgetConvention::kNk ? "Nk" : "(N-1)k";
}

BudgetConvention parse_budget_convention(std::string_view name) {
  if (name == "Nk") return BudgetConvention::kNk;
  if (name == "(N-1)k") return BudgetConvention::kNMinusOneK;
  throw InputError("unknown budget convention '" + std::string(name) + "' (expected Nk or (N-1)k)");
}

std::size_t BurnIn::apply(std::size_t k) const noexcept {
  switch (kind) {
    case Kind::kFixed: return value;
    case Kind::kHalf: return k / 2;
    case Kind::kLast: return k == 0 ? 0 : k - 1;
  }
  return 0;
}

void ExperimentConfig::validate() const {
  std::visit([](const auto& m) { m.validate(); }, model);
  if (num_particles == 0) throw InputError("N must be positive");
  if (backward_draws == 0) throw InputError("M must be positive");
  if (replicates == 0) throw InputError("replicates must be positive");
  if (estimator == Estimator::kPpg) {
    if (k == 0) throw InputError("k must be positive");
    if (k0 >= k) throw InputError("k0 must be smaller than k");
    if (budget && spent_budget() != *budget) {
      throw InputError("budget " + std::to_string(*budget) + " is not met exactly by N = " +
                       std::to_string(num_particles) + ", k = " + std::to_string(k) + " under the " +
                       to_string(budget_convention) + " convention");
    }
  }
  if (reference.num_particles == 0 || reference.backward_draws == 0) {
    throw InputError("reference run needs positive N and M");
  }
}

std::size_t ExperimentConfig::spent_budget() const noexcept {
  const std::size_t per_sweep = budget_convention == BudgetConvention::kNk ? num_particles : num_particles - 1;
  return per_sweep * k;
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + " must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!keys.count(item.key())) throw InputError("unknown key '" + item.key() + "' in " + where);
  }
}

std::size_t get_count(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw InputError(std::string("'") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::uint64_t get_seed(const json& obj, const char* key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw InputError(std::string("'") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double get_real(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw InputError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::vector<std::size_t> get_count_list(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_array() || v.empty()) throw InputError(std::string("grid '") + key + "' must be a non-empty array");
  std::vector<std::size_t> out;
  for (const auto& x : v) {
    if (!x.is_number_integer() || x.get<long long>() <= 0) {
      throw InputError(std::string("grid '") + key + "' entries must be positive integers");
    }
    out.push_back(x.get<std::size_t>());
  }
  return out;
}

std::vector<std::vector<double>> get_matrix(const json& obj, const char* key) {
  if (!obj.contains(key)) throw InputError(std::string("discrete model needs '") + key + "'");
  try {
    return obj.at(key).get<std::vector<std::vector<double>>>();
  } catch (const json::exception&) {
    throw InputError(std::string("'") + key + "' must be a matrix of numbers");
  }
}

ModelSpec model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw InputError("model must be an object with a string 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "lgssm") {
    reject_unknown_keys(j, {"type", "A", "Q", "B", "R"}, "model");
    Lgssm m;
    m = {get_real(j, "A", m.A), get_real(j, "Q", m.Q), get_real(j, "B", m.B), get_real(j, "R", m.R)};
    m.validate();
    return m;
  }
  if (type == "stochvol") {
    reject_unknown_keys(j, {"type", "phi", "sigma", "beta"}, "model");
    StochVol m;
    m = {get_real(j, "phi", m.phi), get_real(j, "sigma", m.sigma), get_real(j, "beta", m.beta)};
    m.validate();
    return m;
  }
  if (type == "discrete") {
    reject_unknown_keys(j, {"type", "transition", "emission", "values", "initial"}, "model");
    DiscreteHmm m = DiscreteHmm::with_defaults(get_matrix(j, "transition"), get_matrix(j, "emission"));
    try {
      if (j.contains("values")) m.values = j.at("values").get<std::vector<double>>();
      if (j.contains("initial")) m.initial = j.at("initial").get<std::vector<double>>();
    } catch (const json::exception&) {
      throw InputError("'values' and 'initial' must be arrays of numbers");
    }
    m.validate();
    return m;
  }
  throw InputError("unknown model type '" + type + "' (expected lgssm, stochvol or discrete)");
}

json model_to_json(const ModelSpec& spec) {
  struct Visitor {
    json operator()(const Lgssm& m) const {
      return {{"type", "lgssm"}, {"A", m.A}, {"Q", m.Q}, {"B", m.B}, {"R", m.R}};
    }
    json operator()(const StochVol& m) const {
      return {{"type", "stochvol"}, {"phi", m.phi}, {"sigma", m.sigma}, {"beta", m.beta}};
    }
    json operator()(const DiscreteHmm& m) const {
      return {{"type", "discrete"}, {"transition", m.transition}, {"emission", m.emission},
              {"values", m.values}, {"initial", m.initial}};
    }
  };
  return std::visit(Visitor{}, spec);
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

ModelSpec parse_model_json(std::string_view json_text) { return model_from_json(parse_text(json_text)); }

ExperimentFile parse_experiment_json(std::string_view json_text) {
  const json j = parse_text(json_text);
  reject_unknown_keys(j,
                      {"schema_version", "model", "n", "observations", "estimator", "N", "M", "k", "k0",
                       "budget", "budget_convention", "replicates", "seed", "mode", "reference",
                       "record_timing", "grid"},
                      "experiment config");
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer() ||
      j.at("schema_version").get<int>() != kConfigSchemaVersion) {
    throw InputError("config must declare \"schema_version\": " + std::to_string(kConfigSchemaVersion));
  }
  if (!j.contains("model")) throw InputError("config must declare a model");

  ExperimentFile file;
  ExperimentConfig& c = file.base;
  c.model = model_from_json(j.at("model"));
  c.n = get_count(j, "n", c.n);
  if (j.contains("estimator")) {
    if (!j.at("estimator").is_string()) throw InputError("'estimator' must be a string");
    c.estimator = parse_estimator(j.at("estimator").get<std::string>());
  }
  c.num_particles = get_count(j, "N", c.num_particles);
  c.backward_draws = get_count(j, "M", c.backward_draws);
  file.k_given = j.contains("k");
  c.k = get_count(j, "k", c.k);
  if (j.contains("k0")) {
    const json& v = j.at("k0");
    if (v.is_string()) {
      const std::string rule = v.get<std::string>();
      if (rule == "half") file.burn_in = {BurnIn::Kind::kHalf, 0};
      else if (rule == "last") file.burn_in = {BurnIn::Kind::kLast, 0};
      else throw InputError("'k0' must be an integer, \"half\" or \"last\"");
    } else {
      file.burn_in = {BurnIn::Kind::kFixed, get_count(j, "k0", 0)};
    }
  }
  if (j.contains("budget")) c.budget = get_count(j, "budget", 0);
  if (j.contains("budget_convention")) {
    if (!j.at("budget_convention").is_string()) throw InputError("'budget_convention' must be a string");
    c.budget_convention = parse_budget_convention(j.at("budget_convention").get<std::string>());
  }
  c.replicates = get_count(j, "replicates", c.replicates);
  c.seed = get_seed(j, "seed", c.seed);
  if (j.contains("mode")) {
    if (!j.at("mode").is_string()) throw InputError("'mode' must be a string");
    c.mode = parse_backward_mode(j.at("mode").get<std::string>());
  }
  if (j.contains("reference")) {
    const json& r = j.at("reference");
    reject_unknown_keys(r, {"N", "M", "seed"}, "reference");
    c.reference.num_particles = get_count(r, "N", c.reference.num_particles);
    c.reference.backward_draws = get_count(r, "M", c.reference.backward_draws);
    c.reference.seed = get_seed(r, "seed", c.reference.seed);
  }
  if (j.contains("record_timing")) {
    if (!j.at("record_timing").is_boolean()) throw InputError("'record_timing' must be a boolean");
    c.record_timing = j.at("record_timing").get<bool>();
  }
  if (j.contains("observations")) {
    const json& o = j.at("observations");
    reject_unknown_keys(o, {"csv", "seed"}, "observations");
    if (o.contains("csv")) {
      if (!o.at("csv").is_string()) throw InputError("'observations.csv' must be a path string");
      file.observations.csv_path = o.at("csv").get<std::string>();
    }
    file.observations.seed = get_seed(o, "seed", file.observations.seed);
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    reject_unknown_keys(g, {"N", "k", "M", "estimator"}, "grid");
    Grid grid;
    if (g.contains("N")) grid.num_particles = get_count_list(g, "N");
    if (g.contains("k")) grid.k = get_count_list(g, "k");
    if (g.contains("M")) grid.backward_draws = get_count_list(g, "M");
    if (g.contains("estimator")) {
      if (!g.at("estimator").is_array() || g.at("estimator").empty()) {
        throw InputError("grid 'estimator' must be a non-empty array");
      }
      for (const auto& e : g.at("estimator")) {
        if (!e.is_string()) throw InputError("grid 'estimator' entries must be strings");
        grid.estimators.push_back(parse_estimator(e.get<std::string>()));
      }
    }
    file.grid = std::move(grid);
  }
  c.k0 = file.burn_in.apply(c.k);

  const bool any_ppg = c.estimator == Estimator::kPpg ||
                       (file.grid && std::count(file.grid->estimators.begin(), file.grid->estimators.end(),
                                                Estimator::kPpg) > 0);
  if (!any_ppg && (file.k_given || j.contains("k0") || (file.grid && !file.grid->k.empty()))) {
    throw InputError("'k' and 'k0' only apply to the ppg estimator");
  }
  if (c.budget && file.grid && !file.grid->k.empty()) {
    throw InputError("a budget-pinned sweep derives k from N; do not also give grid 'k'");
  }
  if (c.budget && file.k_given) throw InputError("a budget-pinned config derives k from N; do not also give 'k'");
  return file;
}

std::vector<ExperimentConfig> expand_cells(const ExperimentFile& file) {
  const ExperimentConfig& base = file.base;
  const Grid grid = file.grid.value_or(Grid{});
  const auto or_base = [](const auto& list, auto value) {
    using T = std::decay_t<decltype(value)>;
    return list.empty() ? std::vector<T>{value} : std::vector<T>(list.begin(), list.end());
  };
  const auto estimators = or_base(grid.estimators, base.estimator);
  const auto ns = or_base(grid.num_particles, base.num_particles);
  const auto ms = or_base(grid.backward_draws, base.backward_draws);
  const auto ks = or_base(grid.k, base.k);

  std::vector<ExperimentConfig> cells;
  std::set<std::string> seen;
  for (const Estimator est : estimators) {
    for (const std::size_t big_n : ns) {
      for (const std::size_t big_m : ms) {
        for (const std::size_t k : ks) {
          ExperimentConfig c = base;
          c.estimator = est;
          c.num_particles = big_n;
          c.backward_draws = big_m;
          if (est == Estimator::kPpg) {
            c.k = k;
            if (base.budget) {
              const std::size_t per_sweep =
                  base.budget_convention == BudgetConvention::kNk ? big_n : big_n - 1;
              if (per_sweep == 0 || *base.budget % per_sweep != 0) {
                throw InputError("budget " + std::to_string(*base.budget) + " is not a multiple of " +
                                 std::to_string(per_sweep) + " (N = " + std::to_string(big_n) + ")");
              }
              c.k = *base.budget / per_sweep;
            }
            c.k0 = file.burn_in.apply(c.k);
          } else {
            c.k = 1;
            c.k0 = 0;
            if (base.budget) c.num_particles = *base.budget;
            c.budget.reset();
          }
          c.validate();
          // Non-PPG cells collapse over N when budget-pinned and over k always.
          if (seen.insert(config_hash(c)).second) cells.push_back(std::move(c));
        }
      }
    }
  }
  return cells;
}

std::string canonical_json(const ExperimentConfig& c) {
  json j = {{"model", model_to_json(c.model)},
            {"n", c.n},
            {"estimator", to_string(c.estimator)},
            {"N", c.num_particles},
            {"M", c.backward_draws},
            {"replicates", c.replicates},
            {"seed", c.seed},
            {"mode", to_string(c.mode)}};
  if (c.estimator == Estimator::kPpg) {
    j["k"] = c.k;
    j["k0"] = c.k0;
    j["budget_convention"] = to_string(c.budget_convention);
    if (c.budget) j["budget"] = *c.budget;
  }
  if (std::holds_alternative<StochVol>(c.model)) {
    j["reference"] = {{"N", c.reference.num_particles}, {"M", c.reference.backward_draws}, {"seed", c.reference.seed}};
  }
  return j.dump();
}

std::uint64_t config_hash_value(const ExperimentConfig& config) {
  // FNV-1a over the canonical JSON text.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : canonical_json(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash_value(config)));
  return buf;
}

std::vector<double> load_observations(const ExperimentFile& file) {
  if (file.observations.csv_path) {
    std::vector<double> obs = read_observations_csv(*file.observations.csv_path);
    if (obs.size() < file.base.n + 1) {
      throw InputError("observation CSV has " + std::to_string(obs.size()) + " rows but n + 1 = " +
                       std::to_string(file.base.n + 1) + " are required");
    }
    obs.resize(file.base.n + 1);
    return obs;
  }
  Rng rng(file.observations.seed);
  return simulate(file.base.model, file.base.n, rng).observations;
}

}  // namespace ppg
