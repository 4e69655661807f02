#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ppg/experiment_config.hpp"
#include "ppg/fk_model.hpp"

namespace ppg {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct ExperimentRecord {
  std::string config_hash;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double exact = 0.0;
  double runtime_ms = 0.0;
  std::vector<double> per_iteration;  // PPG only, iterations 1..k
};

// Value the estimates are compared against, and where it came from.
struct ExactValue {
  double value = 0.0;
  std::string source;  // "kalman_rts", "forward_recursion" or "reference_paris"
};

// Exact smoothing expectation of the one-lag statistic for LGSSM and
// discrete models; a pinned high-N PARIS run for the stochastic volatility
// model.
ExactValue reference_value(const ExperimentConfig& config, std::span<const double> observations);

// Seed of replicate r, derived from (base seed, config hash, r).
std::uint64_t replicate_seed(const ExperimentConfig& config, std::size_t replicate) noexcept;

// R records in replicate order. Replicates run on up to `threads` workers;
// the records do not depend on the worker count.
std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config, std::span<const double> observations,
                                             const ExactValue& exact, std::size_t threads = 1);
std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config, std::span<const double> observations,
                                             std::size_t threads = 1);

struct Summary {
  std::size_t count = 0;
  double bias = 0.0;
  double variance = 0.0;  // unbiased sample variance of the estimates
  double mse = 0.0;
  double std_error = 0.0;  // sd / sqrt(R)
  double mean_runtime = 0.0;
};

Summary aggregate(std::span<const ExperimentRecord> records);
Summary aggregate(std::span<const double> estimates, double exact);

// Summary of the iteration-ell estimates (1-based) of PPG records.
Summary aggregate_iteration(std::span<const ExperimentRecord> records, std::size_t ell);

// Least squares of log|bias| on k: |bias| ~ exp(a k + b).
struct DecayFit {
  double a = 0.0;
  double b = 0.0;
  double a_std_error = 0.0;  // NaN with two points
  double b_std_error = 0.0;
  double a_ci_low = 0.0;  // 95% Student-t interval
  double a_ci_high = 0.0;
  std::size_t points = 0;
};

DecayFit fit_exponential_decay(std::span<const std::pair<double, double>> points);

// Shapes of the bias and MSE bounds with the unknown constants set to c:
// bias ~ c kappa^ell sum||h|| / N, mse ~ c (sum||h||)^2 / N.
struct BoundShapes {
  double rho = 0.0;
  double kappa = 0.0;
  double sup_norm_sum = 0.0;
  double bias_bound = 0.0;
  double mse_bound = 0.0;
};

BoundShapes evaluate_bounds(const FeynmanKacModel& model, const AdditiveFunctional& f, std::size_t n,
                            std::size_t num_particles, std::size_t ell, double c = 1.0);

// Roll-out estimator over iterations k0+1..k:
// bias ~ kappa^k0 sum||h|| / ((k - k0)(1 - kappa) N),
// mse ~ (sum||h||)^2 (c1 + 2 c2 N^{-1/2} / (1 - kappa)) / (N (k - k0)).
BoundShapes evaluate_rollout_bounds(const FeynmanKacModel& model, const AdditiveFunctional& f, std::size_t n,
                                    std::size_t num_particles, std::size_t k, std::size_t k0, double c1 = 1.0,
                                    double c2 = 1.0);

inline constexpr const char* kRecordsHeader =
    "config_hash,model,n,estimator,N,M,k,k0,mode,replicate,seed,estimate,exact,runtime_ms";
inline constexpr const char* kIterationsHeader = "config_hash,replicate,ell,estimate";

void write_records_csv(std::ostream& out, const ExperimentConfig& config, std::span<const ExperimentRecord> records);
void write_iterations_csv(std::ostream& out, std::span<const ExperimentRecord> records);

// Reads records.csv rows back (hash, replicate, seed, estimate, exact, runtime).
std::vector<ExperimentRecord> read_records_csv(std::istream& in);

struct CellResult {
  ExperimentConfig config;
  std::string hash;
  std::vector<ExperimentRecord> records;
  Summary summary;
};

struct ExperimentOutput {
  std::vector<double> observations;
  ExactValue exact;
  std::vector<CellResult> cells;
};

// Loads observations, computes the reference value once and runs every cell.
ExperimentOutput run_experiment_file(const ExperimentFile& file, std::size_t threads);

// Writes records.csv, iterations.csv, summary.csv, fits.csv, observations.csv
// and manifest.json into `dir` (created if missing). Identical inputs give
// identical bytes.
void write_experiment_outputs(const std::string& dir, const ExperimentFile& file, const ExperimentOutput& output);

// Manifest JSON text (no timestamps).
std::string manifest_json(const ExperimentFile& file, const ExperimentOutput& output);

}  // namespace ppg
