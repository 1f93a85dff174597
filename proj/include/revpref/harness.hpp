#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "revpref/bayes_gaussian.hpp"
#include "revpref/consistency.hpp"
#include "revpref/corruption_sa.hpp"
#include "revpref/evaluation.hpp"
#include "revpref/moment_match.hpp"

namespace revpref {

enum class Setting { kGaussian, kCorruption };
enum class Algorithm { kGaussianMcmc, kCorruptionSa, kMomentMatch };
// How (a_t, b_t) are chosen: drawn from the scenario law, or one of the
// sign-revealing designs used by moment matching.
enum class DataDesign { kScenario, kFull, kBudgeted };

std::string to_string(Setting s);
std::string to_string(Algorithm a);
Setting parse_setting(const std::string& s);
Algorithm parse_algorithm(const std::string& s);
Setting setting_of(Algorithm a);
std::string to_string(DataDesign d);
DataDesign parse_design(const std::string& s);

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kGaussianMcmc;
  AbLaw ab_law = AbLaw::kUniform;
  std::size_t n = 3;
  std::size_t samples = 200;  // T
  std::size_t trials = 20;
  std::uint64_t seed = 1;

  // truth laws
  double kappa_star_lo = 1.0;
  double kappa_star_hi = 10.0;
  double delta = 0.1;

  McmcConfig mcmc;
  // Reported Gaussian estimate: trace mean direction after burn-in (K/2 when
  // unset), or theta^(K) when posterior_mean is false.
  bool posterior_mean = true;
  std::optional<std::size_t> burn_in;
  SaConfig sa;
  bool gamma_auto = true;  // sa.gamma = default_gamma(n, T)

  // moment matching; kappa is taken as known (the true kappa*)
  DataDesign design = DataDesign::kFull;
  double b_lower = 1.0;
  double b_upper = 1.0;

  std::size_t eval_draws_gaussian = 10000;
  std::size_t eval_draws_acc = 100000;
  std::size_t workers = 0;  // 0: hardware concurrency

  void validate() const;
  Scenario scenario_template() const;
};

// Public observations of one dataset. Realized utilities are kept apart.
struct Dataset {
  std::size_t n = 0;
  Setting setting = Setting::kGaussian;
  AbLaw ab_law = AbLaw::kUniform;
  DataDesign design = DataDesign::kScenario;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::vector<Observation> records;
};

// Test-oracle side information: the true law and every realized u_t.
struct Sidecar {
  Scenario truth;
  std::vector<std::vector<double>> realized;
};

struct GeneratedData {
  Dataset dataset;
  Sidecar sidecar;
};

// Draws the trial's true parameters: mu* (or u*) uniform on the sphere and kappa*
// uniform on [kappa_star_lo, kappa_star_hi]. A Gaussian mu* without a positive
// coordinate is redrawn (its predictive-accuracy ratio is 0/0).
Scenario draw_truth(const ExperimentConfig& config, std::uint64_t seed);

GeneratedData generate_dataset(const ExperimentConfig& config, std::size_t trial);
GeneratedData generate_dataset(const Scenario& truth, std::size_t samples, std::uint64_t seed,
                               DataDesign design = DataDesign::kScenario, double b_lower = 1.0,
                               double b_upper = 1.0);

// JSON-lines: one header object, then one {"a":..,"b":..,"x":..} record per line.
void write_dataset(std::ostream& os, const Dataset& d);
Dataset read_dataset(std::istream& is);
void write_dataset_csv(std::ostream& os, const Dataset& d);
void write_sidecar(std::ostream& os, const Sidecar& s);
Sidecar read_sidecar(std::istream& is);

std::vector<ConsistencySet> build_sets(const Dataset& d);
// Records with the coordinates whose price is not the exclusion sentinel.
std::vector<DesignedObservation> designed_observations(const Dataset& d);

struct TrialResult {
  Setting setting = Setting::kGaussian;
  Algorithm algorithm = Algorithm::kGaussianMcmc;
  AbLaw ab_law = AbLaw::kUniform;
  std::size_t n = 0;
  std::size_t samples = 0;
  std::size_t trial = 0;
  double metric = 0.0;
  std::string status = "ok";
  double wall_ms = 0.0;
  std::vector<double> estimate;
};

// Runs the configured estimator on `trials` independent datasets and scores each
// with the setting's metric. Failures are recorded per trial. Results come back
// ordered by trial index regardless of worker scheduling.
std::vector<TrialResult> run_experiment(const ExperimentConfig& config,
                                        const std::atomic<bool>* cancel = nullptr);

// Gaussian point estimate of mu as configured by posterior_mean / burn_in.
std::vector<double> reported_mu(const ChainState& chain, const ExperimentConfig& config);

TrialResult run_trial(const ExperimentConfig& config, std::size_t trial);

// setting, scenario, n, T, trial, metric, status
void write_results_header(std::ostream& os);
void write_results_rows(std::ostream& os, const std::vector<TrialResult>& rows);
// setting, scenario, n, T, trial, wall_ms
void write_timing_header(std::ostream& os);
void write_timing_rows(std::ostream& os, const std::vector<TrialResult>& rows);

enum class Scale { kSmoke, kDesk, kFull };
Scale parse_scale(const std::string& s);

struct Table1Cell {
  Setting setting;
  AbLaw ab_law;
  std::size_t n;
  std::size_t samples;
  std::size_t trials;
  McEstimate metric;
  std::size_t failures = 0;
  double wall_ms = 0.0;
};

struct Table1Paths {
  std::string table;   // setting, scenario, n, T, trials, mean, stderr, failures
  std::string trials;  // per-trial results
  std::string timing;  // per-cell and per-trial wall time
};

Table1Paths table1_paths(const std::string& table_path);

ExperimentConfig table1_config(Setting setting, AbLaw law, std::size_t n, Scale scale, std::uint64_t seed);

// Runs the 2 settings x 3 scenarios grid (n in {3} smoke, {3,5} desk, {3,5,10,25}
// full). Each finished cell is flushed before the next starts.
std::vector<Table1Cell> reproduce_table1(const std::string& table_path, Scale scale, std::uint64_t seed,
                                         std::size_t workers = 0, const std::atomic<bool>* cancel = nullptr);

}  // namespace revpref
