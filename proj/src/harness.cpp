#include "revpref/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "revpref/knapsack.hpp"

namespace revpref {

using ojson = nlohmann::ordered_json;

std::string to_string(Setting s) { return s == Setting::kGaussian ? "gaussian" : "corruption"; }

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kGaussianMcmc: return "gaussian_mcmc";
    case Algorithm::kCorruptionSa: return "corruption_sa";
    case Algorithm::kMomentMatch: return "moment_match";
  }
  return "?";
}

Setting parse_setting(const std::string& s) {
  if (s == "gaussian" || s == "vmf") return Setting::kGaussian;
  if (s == "corruption" || s == "delta" || s == "delta_corruption") return Setting::kCorruption;
  throw std::invalid_argument("unknown setting '" + s + "'");
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "gaussian_mcmc" || s == "mcmc") return Algorithm::kGaussianMcmc;
  if (s == "corruption_sa" || s == "sa") return Algorithm::kCorruptionSa;
  if (s == "moment_match" || s == "moment") return Algorithm::kMomentMatch;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

Setting setting_of(Algorithm a) {
  return a == Algorithm::kCorruptionSa ? Setting::kCorruption : Setting::kGaussian;
}

std::string to_string(DataDesign d) {
  switch (d) {
    case DataDesign::kScenario: return "scenario";
    case DataDesign::kFull: return "full";
    case DataDesign::kBudgeted: return "budgeted";
  }
  return "?";
}

DataDesign parse_design(const std::string& s) {
  if (s == "scenario") return DataDesign::kScenario;
  if (s == "full") return DataDesign::kFull;
  if (s == "budgeted") return DataDesign::kBudgeted;
  throw std::invalid_argument("unknown design '" + s + "'");
}

void ExperimentConfig::validate() const {
  if (n < 1) throw std::invalid_argument("config: n must be >= 1");
  if (samples < 1) throw std::invalid_argument("config: T must be >= 1");
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (!(kappa_star_lo > 0.0 && kappa_star_lo <= kappa_star_hi))
    throw std::invalid_argument("config: need 0 < kappa_star_lo <= kappa_star_hi");
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("config: delta must lie in [0,1]");
  if (mcmc.mc_samples < 1) throw std::invalid_argument("config: M must be >= 1");
  mcmc.prior.validate();
  sa.validate();
  if (eval_draws_gaussian < 1 || eval_draws_acc < 1) throw std::invalid_argument("config: N must be >= 1");
  if (algorithm == Algorithm::kMomentMatch) {
    if (design == DataDesign::kScenario)
      throw std::invalid_argument("config: moment matching needs the full or budgeted design");
    if (design == DataDesign::kBudgeted && !(b_lower >= 1.0 && b_upper >= b_lower))
      throw std::invalid_argument("config: need 1 <= b_lower <= b_upper");
  }
}

Scenario ExperimentConfig::scenario_template() const {
  Scenario s;
  s.n = n;
  s.ab_law = ab_law;
  s.seed = seed;
  if (setting_of(algorithm) == Setting::kGaussian) {
    std::vector<double> mu(n, 0.0);
    mu[0] = 1.0;
    s.utility = VmfLaw{{mu, kappa_star_lo}};
  } else {
    std::vector<double> u(n, 0.0);
    u[0] = 1.0;
    s.utility = CorruptLaw{u, delta, std::nullopt};
  }
  return s;
}

Scenario draw_truth(const ExperimentConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  Scenario s;
  s.n = config.n;
  s.ab_law = config.ab_law;
  s.seed = seed;
  if (setting_of(config.algorithm) == Setting::kGaussian) {
    std::vector<double> mu;
    do {
      mu = uniform_on_sphere(config.n, rng);
    } while (std::none_of(mu.begin(), mu.end(), [](double v) { return v > 0.0; }));
    const double kappa = config.kappa_star_lo + (config.kappa_star_hi - config.kappa_star_lo) * uniform01(rng);
    s.utility = VmfLaw{{std::move(mu), kappa}};
  } else {
    s.utility = CorruptLaw{uniform_on_sphere(config.n, rng), config.delta, std::nullopt};
  }
  s.validate();
  return s;
}

GeneratedData generate_dataset(const Scenario& truth, std::size_t samples, std::uint64_t seed, DataDesign design,
                               double b_lower, double b_upper) {
  truth.validate();
  const std::size_t n = truth.n;
  GeneratedData g;
  g.dataset.n = n;
  g.dataset.setting = std::holds_alternative<VmfLaw>(truth.utility) ? Setting::kGaussian : Setting::kCorruption;
  g.dataset.ab_law = truth.ab_law;
  g.dataset.design = design;
  if (const auto* c = std::get_if<CorruptLaw>(&truth.utility)) g.dataset.delta = c->delta;
  g.dataset.seed = seed;
  g.sidecar.truth = truth;

  std::vector<BlockDesign> blocks;
  if (design == DataDesign::kBudgeted) blocks = design_budgeted(n, b_lower);
  const Design full = design_full(n);

  Rng rng(seed);
  const UtilityDraw draw(truth);
  g.dataset.records.reserve(samples);
  g.sidecar.realized.reserve(samples);
  for (std::size_t t = 0; t < samples; ++t) {
    PriceBudget pb;
    switch (design) {
      case DataDesign::kScenario: pb = draw_ab(truth.ab_law, n, rng); break;
      case DataDesign::kFull: pb = {full.a, full.b}; break;
      case DataDesign::kBudgeted:
        pb.a = blocks[t % blocks.size()].a;
        pb.b = b_lower + (b_upper - b_lower) * uniform01(rng);
        break;
    }
    auto u = draw(rng);
    g.dataset.records.push_back(observe(u, pb.a, pb.b));
    g.sidecar.realized.push_back(std::move(u));
  }
  return g;
}

GeneratedData generate_dataset(const ExperimentConfig& config, std::size_t trial) {
  config.validate();
  const Scenario truth = draw_truth(config, derive_seed(config.seed, trial, "truth"));
  const DataDesign design = config.algorithm == Algorithm::kMomentMatch ? config.design : DataDesign::kScenario;
  return generate_dataset(truth, config.samples, derive_seed(config.seed, trial, "data"), design, config.b_lower,
                          config.b_upper);
}

namespace {

constexpr const char* kDatasetFormat = "revpref-dataset";
constexpr const char* kSidecarFormat = "revpref-sidecar";
constexpr int kFormatVersion = 1;

ojson params_json(const VmfParams& p) { return ojson{{"mu", p.mu}, {"kappa", p.kappa}}; }

VmfParams params_from(const ojson& j) {
  return {j.at("mu").get<std::vector<double>>(), j.at("kappa").get<double>()};
}

ojson read_line_json(std::istream& is, std::size_t line_no) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("dataset: unexpected end of input");
  try {
    return ojson::parse(line);
  } catch (const ojson::parse_error& e) {
    throw std::runtime_error("dataset: line " + std::to_string(line_no) + ": " + e.what());
  }
}

void check_header(const ojson& h, const char* format) {
  if (!h.is_object() || h.value("format", "") != format)
    throw std::runtime_error(std::string("expected a '") + format + "' header line");
  if (h.value("version", 0) != kFormatVersion)
    throw std::runtime_error("unsupported format version " + h.value("version", ojson()).dump());
}

}  // namespace

void write_dataset(std::ostream& os, const Dataset& d) {
  ojson h;
  h["format"] = kDatasetFormat;
  h["version"] = kFormatVersion;
  h["n"] = d.n;
  h["T"] = d.records.size();
  h["setting"] = to_string(d.setting);
  h["scenario"] = to_string(d.ab_law);
  h["design"] = to_string(d.design);
  h["delta"] = d.delta;
  h["seed"] = d.seed;
  os << h.dump() << '\n';
  for (const auto& r : d.records) os << ojson{{"a", r.a}, {"b", r.b}, {"x", r.x}}.dump() << '\n';
  if (!os) throw std::runtime_error("dataset: write failed");
}

Dataset read_dataset(std::istream& is) {
  const ojson h = read_line_json(is, 1);
  check_header(h, kDatasetFormat);
  Dataset d;
  try {
    d.n = h.at("n").get<std::size_t>();
    d.setting = parse_setting(h.at("setting").get<std::string>());
    d.ab_law = parse_ab_law(h.at("scenario").get<std::string>());
    d.design = parse_design(h.at("design").get<std::string>());
    d.delta = h.at("delta").get<double>();
    d.seed = h.at("seed").get<std::uint64_t>();
  } catch (const ojson::exception& e) {
    throw std::runtime_error(std::string("dataset header: ") + e.what());
  }
  const auto t = h.at("T").get<std::size_t>();
  d.records.reserve(t);
  for (std::size_t k = 0; k < t; ++k) {
    const ojson j = read_line_json(is, k + 2);
    Observation obs;
    try {
      obs.a = j.at("a").get<std::vector<double>>();
      obs.b = j.at("b").get<double>();
      obs.x = j.at("x").get<std::vector<double>>();
    } catch (const ojson::exception& e) {
      throw std::runtime_error("dataset: record " + std::to_string(k) + ": " + e.what());
    }
    if (obs.a.size() != d.n) throw std::runtime_error("dataset: record " + std::to_string(k) + " has wrong length");
    validate(obs);
    d.records.push_back(std::move(obs));
  }
  return d;
}

void write_dataset_csv(std::ostream& os, const Dataset& d) {
  os << 't';
  for (std::size_t i = 1; i <= d.n; ++i) os << ",a_" << i;
  os << ",b";
  for (std::size_t i = 1; i <= d.n; ++i) os << ",x_" << i;
  os << '\n';
  const auto old = os.precision(17);
  for (std::size_t t = 0; t < d.records.size(); ++t) {
    const auto& r = d.records[t];
    os << t;
    for (double v : r.a) os << ',' << v;
    os << ',' << r.b;
    for (double v : r.x) os << ',' << v;
    os << '\n';
  }
  os.precision(old);
}

void write_sidecar(std::ostream& os, const Sidecar& s) {
  ojson h;
  h["format"] = kSidecarFormat;
  h["version"] = kFormatVersion;
  h["n"] = s.truth.n;
  h["T"] = s.realized.size();
  h["scenario"] = to_string(s.truth.ab_law);
  h["seed"] = s.truth.seed;
  if (const auto* v = std::get_if<VmfLaw>(&s.truth.utility)) {
    h["truth"] = {{"kind", "vmf"}, {"params", params_json(v->params)}};
  } else {
    const auto& c = std::get<CorruptLaw>(s.truth.utility);
    ojson t{{"kind", "corrupt"}, {"u_star", c.u_star}, {"delta", c.delta}};
    t["corruptor"] = c.corruptor ? params_json(*c.corruptor) : ojson(nullptr);
    h["truth"] = std::move(t);
  }
  os << h.dump() << '\n';
  for (const auto& u : s.realized) os << ojson{{"u", u}}.dump() << '\n';
  if (!os) throw std::runtime_error("sidecar: write failed");
}

Sidecar read_sidecar(std::istream& is) {
  const ojson h = read_line_json(is, 1);
  check_header(h, kSidecarFormat);
  Sidecar s;
  try {
    s.truth.n = h.at("n").get<std::size_t>();
    s.truth.ab_law = parse_ab_law(h.at("scenario").get<std::string>());
    s.truth.seed = h.at("seed").get<std::uint64_t>();
    const auto& t = h.at("truth");
    if (t.at("kind") == "vmf") {
      s.truth.utility = VmfLaw{params_from(t.at("params"))};
    } else {
      CorruptLaw c;
      c.u_star = t.at("u_star").get<std::vector<double>>();
      c.delta = t.at("delta").get<double>();
      if (!t.at("corruptor").is_null()) c.corruptor = params_from(t.at("corruptor"));
      s.truth.utility = std::move(c);
    }
    const auto count = h.at("T").get<std::size_t>();
    for (std::size_t k = 0; k < count; ++k)
      s.realized.push_back(read_line_json(is, k + 2).at("u").get<std::vector<double>>());
  } catch (const ojson::exception& e) {
    throw std::runtime_error(std::string("sidecar: ") + e.what());
  }
  s.truth.validate();
  return s;
}

std::vector<ConsistencySet> build_sets(const Dataset& d) {
  std::vector<ConsistencySet> sets;
  sets.reserve(d.records.size());
  for (const auto& r : d.records) sets.push_back(build_set(r));
  return sets;
}

std::vector<DesignedObservation> designed_observations(const Dataset& d) {
  std::vector<DesignedObservation> out;
  out.reserve(d.records.size());
  for (const auto& r : d.records) {
    DesignedObservation o{r, {}};
    for (std::size_t i = 0; i < r.a.size(); ++i)
      if (!is_excluded(r.a[i])) o.revealed.push_back(i);
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<double> reported_mu(const ChainState& chain, const ExperimentConfig& config) {
  if (!config.posterior_mean) return chain.theta.mu;
  return posterior_mean_mu(chain, config.burn_in.value_or(config.mcmc.iterations / 2));
}

TrialResult run_trial(const ExperimentConfig& config, std::size_t trial) {
  TrialResult res;
  res.setting = setting_of(config.algorithm);
  res.algorithm = config.algorithm;
  res.ab_law = config.ab_law;
  res.n = config.n;
  res.samples = config.samples;
  res.trial = trial;
  res.metric = std::numeric_limits<double>::quiet_NaN();
  const auto start = std::chrono::steady_clock::now();
  try {
    const GeneratedData g = generate_dataset(config, trial);
    const Scenario& truth = g.sidecar.truth;
    const std::uint64_t est_seed = derive_seed(config.seed, trial, "estimator");
    const std::uint64_t metric_seed = derive_seed(config.seed, trial, "metric");
    switch (config.algorithm) {
      case Algorithm::kGaussianMcmc: {
        const auto sets = build_sets(g.dataset);
        const ChainState chain = run_chain(sets, config.n, config.mcmc, est_seed);
        res.estimate = reported_mu(chain, config);
        break;
      }
      case Algorithm::kMomentMatch: {
        const double kappa = std::get<VmfLaw>(truth.utility).params.kappa;
        res.estimate = estimate_mu(designed_observations(g.dataset), kappa, config.n).mu;
        break;
      }
      case Algorithm::kCorruptionSa: {
        const auto sets = build_sets(g.dataset);
        SaConfig sa = config.sa;
        if (config.gamma_auto) sa.gamma = default_gamma(config.n, config.samples);
        res.estimate = run_sa(sets, config.n, sa, est_seed).u_hat;
        break;
      }
    }
    if (res.setting == Setting::kGaussian) {
      Rng rng(metric_seed);
      const auto& mu_star = std::get<VmfLaw>(truth.utility).params.mu;
      res.metric = gaussian_pred_accuracy(res.estimate, mu_star, config.ab_law, config.eval_draws_gaussian, rng).mean;
    } else {
      // both terms see the same fresh observations
      Rng r1(metric_seed), r2(metric_seed);
      const auto& u_star = std::get<CorruptLaw>(truth.utility).u_star;
      const double denom = acc(u_star, truth, config.eval_draws_acc, r2).mean;
      if (!(denom > 0.0)) throw DegenerateMetric("Acc(u*) is 0");
      res.metric = acc(res.estimate, truth, config.eval_draws_acc, r1).mean / denom;
    }
  } catch (const std::exception& e) {
    res.status = std::string("error: ") + e.what();
  }
  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::vector<TrialResult> run_experiment(const ExperimentConfig& config, const std::atomic<bool>* cancel) {
  config.validate();
  std::vector<TrialResult> results(config.trials);
  std::size_t workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, config.trials);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < config.trials;) {
      if (cancel && cancel->load()) {
        results[k].setting = setting_of(config.algorithm);
        results[k].algorithm = config.algorithm;
        results[k].ab_law = config.ab_law;
        results[k].n = config.n;
        results[k].samples = config.samples;
        results[k].trial = k;
        results[k].metric = std::numeric_limits<double>::quiet_NaN();
        results[k].status = "cancelled";
        continue;
      }
      results[k] = run_trial(config, k);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return results;
}

namespace {

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '"', '\'');
  return s;
}

}  // namespace

void write_results_header(std::ostream& os) { os << "setting,scenario,n,T,trial,metric,status\n"; }

void write_results_rows(std::ostream& os, const std::vector<TrialResult>& rows) {
  const auto old = os.precision(17);
  std::vector<double> ok;
  for (const auto& r : rows) {
    os << to_string(r.algorithm) << ',' << to_string(r.ab_law) << ',' << r.n << ',' << r.samples << ',' << r.trial
       << ',' << r.metric << ',' << csv_safe(r.status) << '\n';
    if (r.status == "ok") ok.push_back(r.metric);
  }
  if (!rows.empty()) {
    const auto& r = rows.front();
    os << to_string(r.algorithm) << ',' << to_string(r.ab_law) << ',' << r.n << ',' << r.samples << ",mean,"
       << (ok.empty() ? std::numeric_limits<double>::quiet_NaN() : mean_and_stderr(ok).mean) << ",ok="
       << ok.size() << '/' << rows.size() << '\n';
  }
  os.precision(old);
}

void write_timing_header(std::ostream& os) { os << "setting,scenario,n,T,trial,wall_ms\n"; }

void write_timing_rows(std::ostream& os, const std::vector<TrialResult>& rows) {
  const auto old = os.precision(6);
  for (const auto& r : rows)
    os << to_string(r.algorithm) << ',' << to_string(r.ab_law) << ',' << r.n << ',' << r.samples << ',' << r.trial
       << ',' << r.wall_ms << '\n';
  os.precision(old);
}

Scale parse_scale(const std::string& s) {
  if (s == "smoke") return Scale::kSmoke;
  if (s == "desk") return Scale::kDesk;
  if (s == "full") return Scale::kFull;
  throw std::invalid_argument("unknown scale '" + s + "' (smoke, desk, full)");
}

Table1Paths table1_paths(const std::string& table_path) {
  std::string stem = table_path;
  if (stem.size() > 4 && stem.compare(stem.size() - 4, 4, ".csv") == 0) stem.resize(stem.size() - 4);
  return {table_path, stem + ".trials.csv", stem + ".timing.csv"};
}

ExperimentConfig table1_config(Setting setting, AbLaw law, std::size_t n, Scale scale, std::uint64_t seed) {
  ExperimentConfig c;
  c.algorithm = setting == Setting::kGaussian ? Algorithm::kGaussianMcmc : Algorithm::kCorruptionSa;
  c.ab_law = law;
  c.n = n;
  c.delta = 0.1;
  c.seed = derive_seed(seed, n * 16 + static_cast<std::size_t>(setting) * 4 + static_cast<std::size_t>(law),
                       "table1-cell");
  if (scale == Scale::kSmoke) {
    c.samples = 50;
    c.trials = 3;
    c.mcmc.iterations = 100;
    c.mcmc.mc_samples = 256;
    c.sa.iterations = 200;
    c.eval_draws_gaussian = 2000;
    c.eval_draws_acc = 5000;
  } else {
    c.samples = 200;
    c.trials = 20;
    c.mcmc.iterations = 1000;
    c.sa.iterations = 1000;
  }
  return c;
}

std::vector<Table1Cell> reproduce_table1(const std::string& table_path, Scale scale, std::uint64_t seed,
                                         std::size_t workers, const std::atomic<bool>* cancel) {
  std::vector<std::size_t> dims{3};
  if (scale != Scale::kSmoke) dims.push_back(5);
  if (scale == Scale::kFull) {
    dims.push_back(10);
    dims.push_back(25);
  }
  const Table1Paths paths = table1_paths(table_path);
  std::ofstream table(paths.table), trials(paths.trials), timing(paths.timing);
  if (!table || !trials || !timing) throw std::runtime_error("cannot open output files next to " + table_path);
  table << "setting,scenario,n,T,trials,mean,stderr,failures\n";
  write_results_header(trials);
  timing << "setting,scenario,n,T,trial,wall_ms\n";

  std::vector<Table1Cell> cells;
  for (Setting setting : {Setting::kGaussian, Setting::kCorruption}) {
    for (AbLaw law : {AbLaw::kUniform, AbLaw::kDiscrete, AbLaw::kFixedA}) {
      for (std::size_t n : dims) {
        if (cancel && cancel->load()) return cells;
        ExperimentConfig cfg = table1_config(setting, law, n, scale, seed);
        cfg.workers = workers;
        const auto start = std::chrono::steady_clock::now();
        const auto rows = run_experiment(cfg, cancel);
        const double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        if (cancel && cancel->load()) return cells;  // drop the partially run cell

        std::vector<double> ok;
        for (const auto& r : rows)
          if (r.status == "ok") ok.push_back(r.metric);
        Table1Cell cell{setting, law, n, cfg.samples, cfg.trials, mean_and_stderr(ok), rows.size() - ok.size(), wall};
        write_results_rows(trials, rows);
        trials.flush();
        const auto old = table.precision(17);
        table << to_string(setting) << ',' << to_string(law) << ',' << n << ',' << cfg.samples << ',' << cfg.trials
              << ',' << cell.metric.mean << ',' << cell.metric.stderr_ << ',' << cell.failures << '\n';
        table.precision(old);
        table.flush();
        write_timing_rows(timing, rows);
        timing << to_string(cfg.algorithm) << ',' << to_string(law) << ',' << n << ',' << cfg.samples << ",cell,"
               << wall << '\n';
        timing.flush();
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

}  // namespace revpref
