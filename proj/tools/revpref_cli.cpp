#include <atomic>
#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "revpref/bayes_gaussian.hpp"
#include "revpref/corruption_sa.hpp"
#include "revpref/evaluation.hpp"
#include "revpref/harness.hpp"
#include "revpref/moment_match.hpp"

using namespace revpref;
using ojson = nlohmann::ordered_json;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void emit(const ojson& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    auto out = open_out(out_path);
    out << j.dump(2) << '\n';
  }
}

// Options shared by every subcommand that builds an ExperimentConfig.
struct ConfigFlags {
  std::string algorithm = "gaussian_mcmc";
  std::string scenario = "uniform_i";
  std::string design = "full";
  std::string gamma = "auto";
  std::optional<double> sigma_mu, sigma_kappa, sigma_u;
  bool joint = false;
  bool last_state = false;
  std::optional<std::size_t> burn_in;
  ExperimentConfig cfg;

  void add_data(CLI::App* app) {
    app->add_option("--scenario", scenario, "(a,b) law: uniform_i, discrete_ii, fixed_a_iii");
    app->add_option("--n", cfg.n, "dimension")->check(CLI::PositiveNumber);
    app->add_option("-T,--samples", cfg.samples, "observations per dataset")->check(CLI::PositiveNumber);
    app->add_option("--delta", cfg.delta, "corruption probability")->check(CLI::Range(0.0, 1.0));
    app->add_option("--kappa-star-lo", cfg.kappa_star_lo, "lower end of the kappa* law");
    app->add_option("--kappa-star-hi", cfg.kappa_star_hi, "upper end of the kappa* law");
    app->add_option("--design", design, "moment-matching design: full, budgeted");
    app->add_option("--b-lower", cfg.b_lower, "budgeted design: lower budget bound");
    app->add_option("--b-upper", cfg.b_upper, "budgeted design: upper budget bound");
  }

  void add_mcmc(CLI::App* app) {
    app->add_option("-K,--iterations", cfg.mcmc.iterations, "MCMC iterations");
    app->add_option("-M,--mc-samples", cfg.mcmc.mc_samples, "Monte Carlo draws per likelihood");
    app->add_option("--sigma-mu", sigma_mu, "proposal scale for mu (default 0.15/sqrt(n))");
    app->add_option("--sigma-kappa", sigma_kappa, "proposal scale for kappa");
    app->add_option("--kappa-lo", cfg.mcmc.prior.kappa_lo, "prior box lower edge");
    app->add_option("--kappa-hi", cfg.mcmc.prior.kappa_hi, "prior box upper edge");
    app->add_flag("--joint-proposals", joint, "perturb mu and kappa together at every step");
    app->add_flag("--last-state", last_state, "report theta^(K) instead of the trace mean direction");
    app->add_option("--burn-in", burn_in, "trace entries skipped by the trace mean (default K/2)");
  }

  void add_sa(CLI::App* app, bool share_iterations) {
    if (!share_iterations) app->add_option("-K,--iterations", cfg.sa.iterations, "annealing steps");
    app->add_option("--sa-iterations", cfg.sa.iterations, "annealing steps");
    app->add_option("--eta0", cfg.sa.eta0, "initial temperature");
    app->add_option("--reduction", cfg.sa.reduction, "temperature reduction rate c");
    app->add_option("--interval", cfg.sa.interval, "steps between temperature cuts");
    app->add_option("--gamma", gamma, "margin, or 'auto' for 1/(4 n^2 T^(1/4))");
    app->add_option("--sigma-u", sigma_u, "proposal scale");
    app->add_flag("--return-last", cfg.sa.return_last, "report the last iterate instead of the incumbent");
  }

  ExperimentConfig resolve() {
    cfg.algorithm = parse_algorithm(algorithm);
    cfg.ab_law = parse_ab_law(scenario);
    cfg.design = parse_design(design);
    if (sigma_mu || sigma_kappa) {
      auto s = ProposalScales::defaults(cfg.n, cfg.mcmc.prior);
      if (sigma_mu) s.sigma_mu = *sigma_mu;
      if (sigma_kappa) s.sigma_kappa = *sigma_kappa;
      cfg.mcmc.scales = s;
    }
    cfg.sa.sigma_u = sigma_u;
    cfg.mcmc.blockwise = !joint;
    cfg.posterior_mean = !last_state;
    cfg.burn_in = burn_in;
    if (gamma == "auto") {
      cfg.gamma_auto = true;
    } else {
      cfg.gamma_auto = false;
      cfg.sa.gamma = std::stod(gamma);
    }
    cfg.validate();
    return cfg;
  }
};

double resolve_gamma(const std::string& g, std::size_t n, std::size_t t) {
  return g == "auto" ? default_gamma(n, t) : std::stod(g);
}

std::vector<double> read_estimate(const std::string& path) {
  auto in = open_in(path);
  const auto j = ojson::parse(in);
  for (const char* key : {"mu", "u"})
    if (j.contains(key)) return j.at(key).get<std::vector<double>>();
  throw std::runtime_error(path + ": no 'mu' or 'u' field");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimate stochastic linear utilities from observed knapsack purchases."};
  app.set_config("--config", "", "key = value config file; command-line flags take precedence");
  app.require_subcommand(1);
  std::size_t workers = 0;
  app.add_option("--workers", workers, "worker threads (0: one per core)");

  // generate
  ConfigFlags gen_flags;
  std::string gen_setting = "gaussian", gen_out, gen_sidecar, gen_csv;
  std::size_t gen_trial = 0;
  auto* gen = app.add_subcommand("generate", "Draw a dataset (and its oracle sidecar)");
  gen_flags.add_data(gen);
  gen->add_option("--setting", gen_setting, "gaussian or corruption");
  gen->add_option("--seed", gen_flags.cfg.seed, "master seed")->required();
  gen->add_option("--trial", gen_trial, "trial index used in seed derivation");
  gen->add_option("-o,--out", gen_out, "dataset path (JSON lines)")->required();
  gen->add_option("--sidecar", gen_sidecar, "write realized utilities and the true law here");
  gen->add_option("--csv", gen_csv, "also write the observations as CSV");

  // estimate-gaussian
  ConfigFlags eg_flags;
  std::string eg_data, eg_trace, eg_out;
  std::uint64_t eg_seed = 0;
  auto* eg = app.add_subcommand("estimate-gaussian", "Metropolis-Hastings posterior sampling of (mu, kappa)");
  eg_flags.add_mcmc(eg);
  eg->add_option("--data", eg_data, "dataset")->required();
  eg->add_option("--seed", eg_seed, "seed")->required();
  eg->add_option("--trace", eg_trace, "write the chain trace CSV");
  eg->add_option("-o,--out", eg_out, "write the estimate as JSON (default: stdout)");

  // estimate-corruption
  ConfigFlags ec_flags;
  std::string ec_data, ec_trace, ec_out;
  std::uint64_t ec_seed = 0;
  auto* ec = app.add_subcommand("estimate-corruption", "Simulated annealing for the delta-corruption setting");
  ec_flags.add_sa(ec, false);
  ec->add_option("--data", ec_data, "dataset")->required();
  ec->add_option("--seed", ec_seed, "seed")->required();
  ec->add_option("--trace", ec_trace, "write the annealing trace CSV");
  ec->add_option("-o,--out", ec_out, "write the estimate as JSON (default: stdout)");

  // estimate-moment
  std::string em_data, em_out, em_table;
  double em_kappa = 0.0;
  std::size_t em_points = 201;
  auto* em = app.add_subcommand("estimate-moment", "Known-kappa moment matching on a sign-revealing design");
  em->add_option("--data", em_data, "dataset generated with --design full or budgeted")->required();
  em->add_option("--kappa", em_kappa, "known concentration")->required()->check(CLI::PositiveNumber);
  em->add_option("--table", em_table, "also write the forward-map table CSV");
  em->add_option("--table-points", em_points, "grid points of the forward-map table");
  em->add_option("-o,--out", em_out, "write the estimate as JSON (default: stdout)");

  // evaluate
  std::string ev_sidecar, ev_estimate, ev_out;
  std::vector<double> ev_vector;
  std::size_t ev_draws = 0;
  std::uint64_t ev_seed = 0;
  auto* ev = app.add_subcommand("evaluate", "Score an estimate against the true law stored in a sidecar");
  ev->add_option("--sidecar", ev_sidecar, "sidecar written by generate")->required();
  auto* ev_est_opt = ev->add_option("--estimate", ev_estimate, "JSON file with a 'mu' or 'u' field");
  ev->add_option("--vector", ev_vector, "estimate given inline")->delimiter(',')->excludes(ev_est_opt);
  ev->add_option("-N,--draws", ev_draws, "fresh draws (default 10000 Gaussian, 100000 corruption)");
  ev->add_option("--seed", ev_seed, "seed")->required();
  ev->add_option("-o,--out", ev_out, "write the score as JSON (default: stdout)");

  // experiment
  ConfigFlags ex_flags;
  std::string ex_out, ex_timing;
  auto* ex = app.add_subcommand("experiment", "Run repeated trials of one estimator and score them");
  ex_flags.add_data(ex);
  ex_flags.add_mcmc(ex);
  ex_flags.add_sa(ex, true);
  ex->add_option("--algorithm", ex_flags.algorithm, "gaussian_mcmc, corruption_sa, moment_match");
  ex->add_option("--trials", ex_flags.cfg.trials, "independent trials")->check(CLI::PositiveNumber);
  ex->add_option("--eval-draws", ex_flags.cfg.eval_draws_gaussian, "fresh draws for the Gaussian metric");
  ex->add_option("--acc-draws", ex_flags.cfg.eval_draws_acc, "fresh draws per Acc estimate");
  ex->add_option("--seed", ex_flags.cfg.seed, "master seed")->required();
  ex->add_option("-o,--out", ex_out, "results CSV (default: stdout)");
  ex->add_option("--timing", ex_timing, "per-trial wall time CSV");

  // reproduce-table1
  std::string t1_scale = "desk", t1_out = "table1.csv";
  std::uint64_t t1_seed = 0;
  auto* t1 = app.add_subcommand("reproduce-table1", "Run the predictive-accuracy grid (2 settings x 3 scenarios x n)");
  t1->add_option("--scale", t1_scale, "smoke, desk, or full")->check(CLI::IsMember({"smoke", "desk", "full"}));
  t1->add_option("--seed", t1_seed, "master seed")->required();
  t1->add_option("-o,--out", t1_out, "summary CSV; .trials.csv and .timing.csv are written alongside");

  // diagnose-distance
  std::string dd_scenario = "uniform_i", dd_out;
  std::size_t dd_n = 5, dd_bins = 10, dd_draws = 2000, dd_dirs = 10;
  double dd_kappa = 5.0, dd_max = 1.0;
  std::uint64_t dd_seed = 0;
  auto* dd = app.add_subcommand("diagnose-distance", "Coupled-mismatch probability against parameter distance");
  dd->add_option("--scenario", dd_scenario, "(a,b) law");
  dd->add_option("--n", dd_n, "dimension")->check(CLI::Range(2, 1000));
  dd->add_option("--kappa", dd_kappa, "concentration of theta*")->check(CLI::PositiveNumber);
  dd->add_option("--bins", dd_bins, "distance bins")->check(CLI::PositiveNumber);
  dd->add_option("--max-distance", dd_max, "largest distance")->check(CLI::Range(0.0, 2.0));
  dd->add_option("--draws", dd_draws, "draws per direction")->check(CLI::PositiveNumber);
  dd->add_option("--directions", dd_dirs, "random directions per bin")->check(CLI::PositiveNumber);
  dd->add_option("--seed", dd_seed, "seed")->required();
  dd->add_option("-o,--out", dd_out, "CSV path (default: stdout)");

  CLI11_PARSE(app, argc, argv);
  std::signal(SIGINT, on_sigint);

  try {
    if (*gen) {
      gen_flags.algorithm = gen_setting == "corruption" ? "corruption_sa" : "gaussian_mcmc";
      if (gen->count("--design")) gen_flags.algorithm = "moment_match";
      parse_setting(gen_setting);
      const auto cfg = gen_flags.resolve();
      const auto g = generate_dataset(cfg, gen_trial);
      {
        auto out = open_out(gen_out);
        write_dataset(out, g.dataset);
      }
      if (!gen_sidecar.empty()) {
        auto out = open_out(gen_sidecar);
        write_sidecar(out, g.sidecar);
      }
      if (!gen_csv.empty()) {
        auto out = open_out(gen_csv);
        write_dataset_csv(out, g.dataset);
      }
    } else if (*eg) {
      auto in = open_in(eg_data);
      const Dataset d = read_dataset(in);
      eg_flags.cfg.n = d.n;
      const auto cfg = eg_flags.resolve();
      const auto sets = build_sets(d);
      const ChainState chain = run_chain(sets, d.n, cfg.mcmc, eg_seed);
      const auto mu = reported_mu(chain, cfg);
      if (!eg_trace.empty()) {
        auto out = open_out(eg_trace);
        write_trace_csv(out, chain);
      }
      emit({{"mu", mu},
            {"kappa", chain.theta.kappa},
            {"log_lik_hat", chain.log_lik_hat},
            {"acceptance_rate", chain.acceptance_rate()},
            {"iterations", chain.step_index}},
           eg_out);
    } else if (*ec) {
      auto in = open_in(ec_data);
      const Dataset d = read_dataset(in);
      ec_flags.cfg.n = d.n;
      ec_flags.cfg.samples = d.records.size();
      auto cfg = ec_flags.resolve();
      cfg.sa.gamma = resolve_gamma(ec_flags.gamma, d.n, d.records.size());
      const auto sets = build_sets(d);
      const SaResult r = run_sa(sets, d.n, cfg.sa, ec_seed);
      if (!ec_trace.empty()) {
        auto out = open_out(ec_trace);
        write_sa_trace_csv(out, r);
      }
      emit({{"u", r.u_hat},
            {"count", r.objective},
            {"count_at_zero_margin", count_consistent(sets, r.u_hat, 0.0)},
            {"T", sets.size()},
            {"gamma", cfg.sa.gamma}},
           ec_out);
    } else if (*em) {
      auto in = open_in(em_data);
      const Dataset d = read_dataset(in);
      if (d.design == DataDesign::kScenario)
        throw std::runtime_error("estimate-moment needs a dataset generated with --design full or budgeted");
      if (!em_table.empty()) {
        const auto table = MarginalTable::build(d.n, em_kappa, em_points);
        table.check_monotone();
        auto out = open_out(em_table);
        table.write_csv(out);
      }
      const auto est = estimate_mu(designed_observations(d), em_kappa, d.n);
      emit({{"mu", est.mu}, {"p_hat", est.p_hat}, {"mu_raw", est.mu_raw}, {"degenerate", est.degenerate}}, em_out);
    } else if (*ev) {
      auto in = open_in(ev_sidecar);
      const Sidecar s = read_sidecar(in);
      const auto est = ev_estimate.empty() ? ev_vector : read_estimate(ev_estimate);
      if (est.size() != s.truth.n) throw std::runtime_error("estimate dimension does not match the sidecar");
      ojson j;
      if (const auto* v = std::get_if<VmfLaw>(&s.truth.utility)) {
        Rng rng(ev_seed);
        const auto m = gaussian_pred_accuracy(est, v->params.mu, s.truth.ab_law, ev_draws ? ev_draws : 10000, rng);
        j = {{"metric", "gaussian_pred_accuracy"}, {"mean", m.mean}, {"stderr", m.stderr_}, {"draws", m.samples}};
      } else {
        const auto& c = std::get<CorruptLaw>(s.truth.utility);
        const std::size_t draws = ev_draws ? ev_draws : 100000;
        Rng r1(ev_seed), r2(ev_seed);
        const auto a_hat = acc(est, s.truth, draws, r1);
        const auto a_star = acc(c.u_star, s.truth, draws, r2);
        j = {{"metric", "acc_ratio"},
             {"mean", a_star.mean > 0 ? a_hat.mean / a_star.mean : 0.0},
             {"acc_hat", a_hat.mean},
             {"acc_hat_stderr", a_hat.stderr_},
             {"acc_star", a_star.mean},
             {"acc_star_stderr", a_star.stderr_},
             {"draws", draws}};
      }
      emit(j, ev_out);
    } else if (*ex) {
      auto cfg = ex_flags.resolve();
      cfg.workers = workers;
      const auto rows = run_experiment(cfg, &g_interrupted);
      if (ex_out.empty()) {
        write_results_header(std::cout);
        write_results_rows(std::cout, rows);
      } else {
        auto out = open_out(ex_out);
        write_results_header(out);
        write_results_rows(out, rows);
      }
      if (!ex_timing.empty()) {
        auto out = open_out(ex_timing);
        write_timing_header(out);
        write_timing_rows(out, rows);
      }
      if (g_interrupted) return 130;
    } else if (*t1) {
      const auto cells = reproduce_table1(t1_out, parse_scale(t1_scale), t1_seed, workers, &g_interrupted);
      for (const auto& c : cells)
        std::cerr << to_string(c.setting) << ' ' << to_string(c.ab_law) << " n=" << c.n << ": " << c.metric.mean
                  << " +- " << c.metric.stderr_ << " (" << c.wall_ms / 1000.0 << " s)\n";
      if (g_interrupted) {
        std::cerr << "interrupted; finished cells were written to " << t1_out << '\n';
        return 130;
      }
    } else if (*dd) {
      Rng rng(derive_seed(dd_seed, 0, "theta-star"));
      const auto mu = uniform_on_sphere(dd_n, rng);
      std::vector<double> distances(dd_bins);
      for (std::size_t k = 0; k < dd_bins; ++k) distances[k] = dd_max * static_cast<double>(k + 1) / dd_bins;
      const auto diag =
          distance_diagnostic({mu, dd_kappa}, parse_ab_law(dd_scenario), distances, dd_draws, dd_dirs, dd_seed);
      if (dd_out.empty()) {
        write_distance_csv(std::cout, diag);
      } else {
        auto out = open_out(dd_out);
        write_distance_csv(out, diag);
      }
      std::cerr << "same-parameter baseline: " << diag.baseline.mean << " +- " << diag.baseline.stderr_ << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
