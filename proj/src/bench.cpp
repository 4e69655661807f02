#include "ppg/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "ppg/error.hpp"
#include "ppg/gibbs.hpp"
#include "ppg/models.hpp"
#include "ppg/oracles.hpp"
#include "ppg/paris.hpp"

namespace ppg {

namespace {

std::vector<double> record_prefix(std::span<const double> observations, std::size_t n) {
  if (observations.size() < n + 1) {
    throw InputError("observation record has " + std::to_string(observations.size()) + " entries; n + 1 = " +
                     std::to_string(n + 1) + " are required");
  }
  return {observations.begin(), observations.begin() + static_cast<std::ptrdiff_t>(n + 1)};
}

ExperimentRecord run_replicate(const ExperimentConfig& config, const FeynmanKacModel& model,
                               const AdditiveFunctional& f, const std::string& hash, std::size_t r, double exact) {
  ExperimentRecord rec;
  rec.config_hash = hash;
  rec.replicate = r;
  rec.seed = replicate_seed(config, r);
  rec.exact = exact;
  Rng rng(rec.seed);
  const ParisOptions options{config.backward_draws, config.mode, 0};
  const auto start = std::chrono::steady_clock::now();
  switch (config.estimator) {
    case Estimator::kParis:
      rec.estimate = run_paris(model, f, config.n, config.num_particles, options, rng);
      break;
    case Estimator::kFfbsm:
      rec.estimate = run_ffbsm(model, f, config.n, config.num_particles, rng);
      break;
    case Estimator::kPpg: {
      const Trajectory zeta = default_init_path(model, config.n, config.num_particles, rng, config.mode);
      PpgRun run = run_ppg(model, f, config.num_particles, config.k, config.k0, zeta, options, rng);
      rec.estimate = run.rollout;
      rec.per_iteration = std::move(run.per_iteration);
      break;
    }
  }
  if (config.record_timing) {
    rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return rec;
}

Summary summarize(std::span<const double> estimates, std::span<const double> exact,
                  std::span<const double> runtimes) {
  Summary s;
  s.count = estimates.size();
  if (s.count == 0) throw InputError("cannot aggregate an empty record set");
  double mean = 0.0;
  double mean_exact = 0.0;
  double sq = 0.0;
  for (std::size_t r = 0; r < s.count; ++r) {
    mean += estimates[r];
    mean_exact += exact[r];
    const double e = estimates[r] - exact[r];
    sq += e * e;
  }
  const auto count = static_cast<double>(s.count);
  mean /= count;
  mean_exact /= count;
  s.bias = mean - mean_exact;
  s.mse = sq / count;
  double var = 0.0;
  for (const double x : estimates) var += (x - mean) * (x - mean);
  s.variance = s.count > 1 ? var / (count - 1.0) : 0.0;
  s.std_error = std::sqrt(s.variance / count);
  double rt = 0.0;
  for (const double x : runtimes) rt += x;
  s.mean_runtime = runtimes.empty() ? 0.0 : rt / static_cast<double>(runtimes.size());
  return s;
}

double require_number(const std::string& text, const char* column) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw InputError(std::string("bad value '") + text + "' in column " + column);
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

ExactValue reference_value(const ExperimentConfig& config, std::span<const double> observations) {
  const std::vector<double> obs = record_prefix(observations, config.n);
  struct Visitor {
    const ExperimentConfig& config;
    const std::vector<double>& obs;

    ExactValue operator()(const Lgssm& m) const {
      return {exact_one_lag_expectation(lgssm_target_moments(m, obs)), "kalman_rts"};
    }
    ExactValue operator()(const DiscreteHmm& m) const {
      return {discrete_exact_smoothing(m, obs, one_lag_functional(m, config.n), config.n), "forward_recursion"};
    }
    ExactValue operator()(const StochVol& m) const {
      const StochVolFeynmanKac model(m, obs);
      Rng rng(config.reference.seed);
      const ParisOptions options{config.reference.backward_draws, BackwardMode::kAuto, 0};
      return {run_paris(model, one_lag_functional(config.n), config.n, config.reference.num_particles, options, rng),
              "reference_paris"};
    }
  };
  return std::visit(Visitor{config, obs}, config.model);
}

std::uint64_t replicate_seed(const ExperimentConfig& config, std::size_t replicate) noexcept {
  return mix_keys(mix_keys(config.seed, config_hash_value(config)), replicate);
}

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config, std::span<const double> observations,
                                             const ExactValue& exact, std::size_t threads) {
  config.validate();
  const std::vector<double> obs = record_prefix(observations, config.n);
  const std::unique_ptr<FeynmanKacModel> model = make_feynman_kac(config.model, obs);
  const AdditiveFunctional f = one_lag_functional(config.model, config.n);
  const std::string hash = config_hash(config);

  std::vector<ExperimentRecord> records(config.replicates);
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, config.replicates);
  if (workers == 1) {
    for (std::size_t r = 0; r < config.replicates; ++r) {
      records[r] = run_replicate(config, *model, f, hash, r, exact.value);
    }
    return records;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < config.replicates; r = next++) {
          try {
            records[r] = run_replicate(config, *model, f, hash, r, exact.value);
          } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = config.replicates;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config, std::span<const double> observations,
                                             std::size_t threads) {
  return run_experiment(config, observations, reference_value(config, observations), threads);
}

Summary aggregate(std::span<const ExperimentRecord> records) {
  std::vector<double> est, exact, rt;
  for (const auto& r : records) {
    est.push_back(r.estimate);
    exact.push_back(r.exact);
    rt.push_back(r.runtime_ms);
  }
  return summarize(est, exact, rt);
}

Summary aggregate(std::span<const double> estimates, double exact) {
  const std::vector<double> ex(estimates.size(), exact);
  return summarize(estimates, ex, {});
}

Summary aggregate_iteration(std::span<const ExperimentRecord> records, std::size_t ell) {
  std::vector<double> est, exact;
  for (const auto& r : records) {
    if (ell == 0 || ell > r.per_iteration.size()) {
      throw InputError("record has no iteration " + std::to_string(ell));
    }
    est.push_back(r.per_iteration[ell - 1]);
    exact.push_back(r.exact);
  }
  return summarize(est, exact, {});
}

DecayFit fit_exponential_decay(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw InputError("decay fit needs at least two points");
  DecayFit fit;
  fit.points = points.size();
  const auto count = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  std::vector<double> ys;
  for (const auto& [k, bias] : points) {
    if (!(std::abs(bias) > 0.0) || !std::isfinite(bias)) throw InputError("decay fit needs finite nonzero biases");
    ys.push_back(std::log(std::abs(bias)));
    mx += k;
    my += ys.back();
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sxx += (points[i].first - mx) * (points[i].first - mx);
    sxy += (points[i].first - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw InputError("decay fit needs at least two distinct k");
  fit.a = sxy / sxx;
  fit.b = my - fit.a * mx;
  if (points.size() == 2) {
    fit.a_std_error = fit.b_std_error = std::numeric_limits<double>::quiet_NaN();
    fit.a_ci_low = -std::numeric_limits<double>::infinity();
    fit.a_ci_high = std::numeric_limits<double>::infinity();
    return fit;
  }
  double rss = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double e = ys[i] - fit.a * points[i].first - fit.b;
    rss += e * e;
  }
  const double dof = count - 2.0;
  const double s2 = rss / dof;
  fit.a_std_error = std::sqrt(s2 / sxx);
  fit.b_std_error = std::sqrt(s2 * (1.0 / count + mx * mx / sxx));
  const double t = boost::math::quantile(boost::math::students_t(dof), 0.975);
  fit.a_ci_low = fit.a - t * fit.a_std_error;
  fit.a_ci_high = fit.a + t * fit.a_std_error;
  return fit;
}

BoundShapes evaluate_bounds(const FeynmanKacModel& model, const AdditiveFunctional& f, std::size_t n,
                            std::size_t num_particles, std::size_t ell, double c) {
  BoundShapes s;
  s.rho = mixing_constant_rho(model, n);
  s.kappa = kappa(s.rho, n, num_particles);
  s.sup_norm_sum = f.sup_norm_sum(n);
  const auto big_n = static_cast<double>(num_particles);
  s.bias_bound = c * s.sup_norm_sum * std::pow(s.kappa, static_cast<double>(ell)) / big_n;
  s.mse_bound = c * s.sup_norm_sum * s.sup_norm_sum / big_n;
  return s;
}

BoundShapes evaluate_rollout_bounds(const FeynmanKacModel& model, const AdditiveFunctional& f, std::size_t n,
                                    std::size_t num_particles, std::size_t k, std::size_t k0, double c1,
                                    double c2) {
  if (k0 >= k) throw InputError("k0 must be smaller than k");
  BoundShapes s;
  s.rho = mixing_constant_rho(model, n);
  s.kappa = kappa(s.rho, n, num_particles);
  s.sup_norm_sum = f.sup_norm_sum(n);
  const auto big_n = static_cast<double>(num_particles);
  const auto kept = static_cast<double>(k - k0);
  s.bias_bound = std::pow(s.kappa, static_cast<double>(k0)) * s.sup_norm_sum / (kept * (1.0 - s.kappa) * big_n);
  s.mse_bound = s.sup_norm_sum * s.sup_norm_sum * (c1 + 2.0 * c2 / (std::sqrt(big_n) * (1.0 - s.kappa))) /
                (big_n * kept);
  return s;
}

void write_records_csv(std::ostream& out, const ExperimentConfig& config, std::span<const ExperimentRecord> records) {
  const bool ppg = config.estimator == Estimator::kPpg;
  const std::string mode = config.estimator == Estimator::kFfbsm ? "exact" : to_string(config.mode);
  const std::string prefix = model_name(config.model) + "," + std::to_string(config.n) + "," +
                             to_string(config.estimator) + "," + std::to_string(config.num_particles) + "," +
                             std::to_string(config.backward_draws) + "," +
                             (ppg ? std::to_string(config.k) + "," + std::to_string(config.k0) : std::string(",")) +
                             "," + mode + ",";
  for (const auto& r : records) {
    out << r.config_hash << ',' << prefix << r.replicate << ',' << r.seed << ',' << format_double(r.estimate) << ','
        << format_double(r.exact) << ',' << format_double(r.runtime_ms) << '\n';
  }
}

void write_iterations_csv(std::ostream& out, std::span<const ExperimentRecord> records) {
  for (const auto& r : records) {
    for (std::size_t l = 0; l < r.per_iteration.size(); ++l) {
      out << r.config_hash << ',' << r.replicate << ',' << (l + 1) << ',' << format_double(r.per_iteration[l]) << '\n';
    }
  }
}

std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("records CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  const auto column = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError(std::string("records CSV lacks column '") + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_hash = column("config_hash"), c_rep = column("replicate"), c_seed = column("seed"),
                    c_est = column("estimate"), c_exact = column("exact"), c_rt = column("runtime_ms");
  std::vector<ExperimentRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) throw InputError("records CSV row has the wrong number of fields");
    ExperimentRecord r;
    r.config_hash = cells[c_hash];
    r.replicate = static_cast<std::size_t>(require_number(cells[c_rep], "replicate"));
    r.seed = std::stoull(cells[c_seed]);
    r.estimate = require_number(cells[c_est], "estimate");
    if (cells[c_exact].empty()) throw InputError("records CSV row has no exact value");
    r.exact = require_number(cells[c_exact], "exact");
    r.runtime_ms = require_number(cells[c_rt], "runtime_ms");
    out.push_back(std::move(r));
  }
  return out;
}

ExperimentOutput run_experiment_file(const ExperimentFile& file, std::size_t threads) {
  ExperimentOutput out;
  const std::vector<ExperimentConfig> cells = expand_cells(file);
  out.observations = load_observations(file);
  out.exact = reference_value(file.base, out.observations);
  for (const auto& cell : cells) {
    CellResult res;
    res.config = cell;
    res.hash = config_hash(cell);
    res.records = run_experiment(cell, out.observations, out.exact, threads);
    res.summary = aggregate(res.records);
    out.cells.push_back(std::move(res));
  }
  return out;
}

std::string manifest_json(const ExperimentFile& file, const ExperimentOutput& output) {
  using nlohmann::ordered_json;
  ordered_json m;
  m["library"] = "ppg";
  m["library_version"] = kLibraryVersion;
  m["schema_version"] = kConfigSchemaVersion;
  m["initial_law"] = "stationary";
  ordered_json obs;
  if (file.observations.csv_path) {
    obs["csv"] = *file.observations.csv_path;
  } else {
    obs["seed"] = file.observations.seed;
  }
  obs["length"] = output.observations.size();
  m["observations"] = obs;
  m["exact"] = {{"value", output.exact.value}, {"source", output.exact.source}};
  if (output.exact.source == "reference_paris") {
    m["exact"]["reference"] = {{"N", file.base.reference.num_particles},
                               {"M", file.base.reference.backward_draws},
                               {"seed", file.base.reference.seed}};
  }
  ordered_json cells = ordered_json::array();
  for (const auto& c : output.cells) {
    ordered_json cell;
    cell["config_hash"] = c.hash;
    cell["config"] = ordered_json::parse(canonical_json(c.config));
    cell["summary"] = {{"replicates", c.summary.count},     {"bias", c.summary.bias},
                       {"variance", c.summary.variance},     {"mse", c.summary.mse},
                       {"stderr", c.summary.std_error},      {"mean_runtime_ms", c.summary.mean_runtime}};
    cells.push_back(std::move(cell));
  }
  m["cells"] = std::move(cells);
  return m.dump(2) + "\n";
}

void write_experiment_outputs(const std::string& dir, const ExperimentFile& file, const ExperimentOutput& output) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  const fs::path root(dir);

  std::ostringstream records, iterations, summary, fits, obs;
  records << kRecordsHeader << '\n';
  iterations << kIterationsHeader << '\n';
  summary << "config_hash,estimator,N,M,k,k0,replicates,bias,variance,mse,stderr,mean_runtime_ms\n";
  fits << "config_hash,N,k,points,a,b,a_stderr,b_stderr,a_ci_low,a_ci_high\n";
  for (const auto& c : output.cells) {
    write_records_csv(records, c.config, c.records);
    write_iterations_csv(iterations, c.records);
    const bool ppg = c.config.estimator == Estimator::kPpg;
    const Summary& s = c.summary;
    summary << c.hash << ',' << to_string(c.config.estimator) << ',' << c.config.num_particles << ','
            << c.config.backward_draws << ',' << (ppg ? std::to_string(c.config.k) : "") << ','
            << (ppg ? std::to_string(c.config.k0) : "") << ',' << s.count << ',' << format_double(s.bias) << ','
            << format_double(s.variance) << ',' << format_double(s.mse) << ',' << format_double(s.std_error) << ','
            << format_double(s.mean_runtime) << '\n';
    if (ppg && c.config.k >= 2) {
      std::vector<std::pair<double, double>> points;
      for (std::size_t l = 1; l <= c.config.k; ++l) {
        points.emplace_back(static_cast<double>(l), aggregate_iteration(c.records, l).bias);
      }
      try {
        const DecayFit fit = fit_exponential_decay(points);
        fits << c.hash << ',' << c.config.num_particles << ',' << c.config.k << ',' << fit.points << ','
             << format_double(fit.a) << ',' << format_double(fit.b) << ',' << format_double(fit.a_std_error) << ','
             << format_double(fit.b_std_error) << ',' << format_double(fit.a_ci_low) << ','
             << format_double(fit.a_ci_high) << '\n';
      } catch (const InputError&) {
        // a zero bias at some iteration leaves this cell without a fit
      }
    }
  }
  write_observations_csv(obs, output.observations);

  write_text(root / "records.csv", records.str());
  write_text(root / "iterations.csv", iterations.str());
  write_text(root / "summary.csv", summary.str());
  write_text(root / "fits.csv", fits.str());
  write_text(root / "observations.csv", obs.str());
  write_text(root / "manifest.json", manifest_json(file, output));
}

}  // namespace ppg
