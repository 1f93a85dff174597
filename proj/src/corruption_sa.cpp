#include "revpref/corruption_sa.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace revpref {

void SaConfig::validate() const {
  if (!(eta0 > 0.0)) throw std::invalid_argument("sa: eta0 must be positive");
  if (!(reduction > 0.0 && reduction < 1.0)) throw std::invalid_argument("sa: reduction rate must lie in (0,1)");
  if (interval < 1) throw std::invalid_argument("sa: interval must be >= 1");
  if (!(gamma >= 0.0)) throw std::invalid_argument("sa: gamma must be >= 0");
  if (sigma_u && !(*sigma_u > 0.0)) throw std::invalid_argument("sa: sigma_u must be positive");
}

double default_gamma(std::size_t n, std::size_t t) {
  if (n < 1 || t < 1) throw std::invalid_argument("default_gamma: n and T must be >= 1");
  const double nn = static_cast<double>(n);
  return 1.0 / (4.0 * nn * nn * std::pow(static_cast<double>(t), 0.25));
}

double sa_acceptance(double delta, double eta) {
  if (delta >= 0.0) return 1.0;
  if (!(eta > 0.0)) return 0.0;
  return std::exp(delta / eta);
}

double temperature_at(const SaConfig& config, std::size_t k) {
  return config.eta0 * std::pow(config.reduction, static_cast<double>(k / config.interval));
}

SaState init_sa(std::span<const ConsistencySet> sets, std::size_t n, const SaConfig& config, Rng& rng) {
  config.validate();
  SaState s;
  s.u = uniform_on_sphere(n, rng);
  s.objective = count_consistent(sets, s.u, config.gamma);
  s.eta = config.eta0;
  s.best_u = s.u;
  s.best_objective = s.objective;
  return s;
}

bool sa_step(SaState& state, std::span<const ConsistencySet> sets, const SaConfig& config, Rng& rng) {
  const std::size_t n = state.u.size();
  ++state.step;
  // the schedule is recomputed, not multiplied in place, so eta is exact
  state.eta = temperature_at(config, state.step);

  const double sigma = config.sigma_u.value_or(0.3 / std::sqrt(static_cast<double>(n)));
  std::normal_distribution<double> gauss;
  std::vector<double> cand(n);
  do {
    for (std::size_t i = 0; i < n; ++i) cand[i] = state.u[i] + sigma * gauss(rng);
  } while (!normalize(cand));

  const std::size_t obj = count_consistent(sets, cand, config.gamma);
  const double delta = static_cast<double>(obj) - static_cast<double>(state.objective);
  const bool accepted = uniform01(rng) < sa_acceptance(delta, state.eta);
  if (accepted) {
    state.u = std::move(cand);
    state.objective = obj;
    if (state.objective > state.best_objective) {
      state.best_objective = state.objective;
      state.best_u = state.u;
    }
  }
  return accepted;
}

SaResult run_sa(std::span<const ConsistencySet> sets, std::size_t n, const SaConfig& config,
                std::uint64_t seed) {
  config.validate();
  for (const auto& s : sets)
    if (s.dim() != n) throw std::invalid_argument("run_sa: consistency set dimension mismatch");
  Rng rng(seed);
  SaResult res;
  SaState state = init_sa(sets, n, config, rng);
  res.trace.reserve(config.iterations + 1);
  res.trace.push_back({state.objective, state.best_objective, state.eta, true});
  for (std::size_t k = 0; k < config.iterations; ++k) {
    const bool acc = sa_step(state, sets, config, rng);
    res.trace.push_back({state.objective, state.best_objective, state.eta, acc});
  }
  res.u_hat = config.return_last ? state.u : state.best_u;
  res.objective = config.return_last ? state.objective : state.best_objective;
  res.final_state = std::move(state);
  return res;
}

void write_sa_trace_csv(std::ostream& os, const SaResult& result) {
  os << "step,objective,best_objective,eta,accepted\n";
  const auto old = os.precision(17);
  for (std::size_t k = 0; k < result.trace.size(); ++k) {
    const auto& e = result.trace[k];
    os << k << ',' << e.objective << ',' << e.best_objective << ',' << e.eta << ',' << (e.accepted ? 1 : 0)
       << '\n';
  }
  os.precision(old);
}

}  // namespace revpref
