#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ppg/backward.hpp"
#include "ppg/models.hpp"

namespace ppg {

inline constexpr int kConfigSchemaVersion = 1;

enum class Estimator { kParis, kFfbsm, kPpg };

const char* to_string(Estimator estimator) noexcept;
Estimator parse_estimator(std::string_view name);

// Total particle budget C of a PPG run: N k or (N - 1) k.
enum class BudgetConvention { kNk, kNMinusOneK };

const char* to_string(BudgetConvention convention) noexcept;
BudgetConvention parse_budget_convention(std::string_view name);

// High-N PARIS run used as the reference value when no exact oracle exists.
struct ReferenceRun {
  std::size_t num_particles = 10000;
  std::size_t backward_draws = 2;
  std::uint64_t seed = 1;
};

// One grid cell: everything needed to produce its replicate records.
struct ExperimentConfig {
  ModelSpec model = Lgssm{};
  std::size_t n = 100;
  Estimator estimator = Estimator::kParis;
  std::size_t num_particles = 100;
  std::size_t backward_draws = 2;
  std::size_t k = 1;   // PPG sweeps
  std::size_t k0 = 0;  // PPG burn-in
  BudgetConvention budget_convention = BudgetConvention::kNk;
  std::optional<std::size_t> budget;
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  BackwardMode mode = BackwardMode::kAuto;
  ReferenceRun reference;
  bool record_timing = false;

  // Throws InputError on inconsistent settings (k0 >= k, budget mismatch...).
  void validate() const;
  // Budget actually spent under the configured convention (PPG only).
  std::size_t spent_budget() const noexcept;
};

// Burn-in rule applied when a sweep varies k.
struct BurnIn {
  enum class Kind { kFixed, kHalf, kLast } kind = Kind::kHalf;
  std::size_t value = 0;

  std::size_t apply(std::size_t k) const noexcept;
};

struct ObservationSource {
  std::optional<std::string> csv_path;
  std::uint64_t seed = 1;
};

struct Grid {
  std::vector<std::size_t> num_particles;
  std::vector<std::size_t> k;
  std::vector<std::size_t> backward_draws;
  std::vector<Estimator> estimators;
};

// Parsed experiment file (JSON, schema_version 1, unknown keys rejected).
struct ExperimentFile {
  ExperimentConfig base;
  BurnIn burn_in;
  ObservationSource observations;
  std::optional<Grid> grid;
  bool k_given = false;
};

ExperimentFile parse_experiment_json(std::string_view json_text);

// Model-only JSON block, e.g. {"type": "lgssm", "A": 0.97}.
ModelSpec parse_model_json(std::string_view json_text);

// Cells of the cross product of the grid (one cell without a grid). Under a
// budget, k = C / N (or C / (N - 1)) for PPG cells and N = C for PARIS/FFBSm.
std::vector<ExperimentConfig> expand_cells(const ExperimentFile& file);

// Canonical JSON of one cell; the config hash is derived from it.
std::string canonical_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);
std::uint64_t config_hash_value(const ExperimentConfig& config);

// Observation record named by the file: read from CSV or simulated.
std::vector<double> load_observations(const ExperimentFile& file);

}  // namespace ppg
