#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "revpref/consistency.hpp"
#include "revpref/rng.hpp"

namespace revpref {

struct SaConfig {
  std::size_t iterations = 1000;  // K
  double eta0 = 5.0;              // initial temperature
  double reduction = 0.9;         // c in (0, 1)
  std::size_t interval = 25;      // tau, steps between temperature cuts
  double gamma = 0.0;             // margin
  std::optional<double> sigma_u;  // 0.3/sqrt(n) when unset
  bool return_last = false;       // report u^(K) instead of the incumbent

  void validate() const;
};

struct SaState {
  std::vector<double> u;
  std::size_t objective = 0;
  double eta = 1.0;
  std::size_t step = 0;
  std::vector<double> best_u;
  std::size_t best_objective = 0;
};

struct SaTraceEntry {
  std::size_t objective;
  std::size_t best_objective;
  double eta;
  bool accepted;
};

struct SaResult {
  std::vector<double> u_hat;
  std::size_t objective = 0;  // count of u_hat at the configured margin
  SaState final_state;
  std::vector<SaTraceEntry> trace;
};

// 1 / (4 n^2 T^{1/4})
double default_gamma(std::size_t n, std::size_t t);

// min(exp(delta / eta), 1)
double sa_acceptance(double delta, double eta);

// Temperature after k steps: eta0 * c^floor(k / tau).
double temperature_at(const SaConfig& config, std::size_t k);

SaState init_sa(std::span<const ConsistencySet> sets, std::size_t n, const SaConfig& config, Rng& rng);

// Advances one step: cools when the new step index is a multiple of tau, then
// proposes, accepts, and updates the incumbent. Returns whether the move was accepted.
bool sa_step(SaState& state, std::span<const ConsistencySet> sets, const SaConfig& config, Rng& rng);

SaResult run_sa(std::span<const ConsistencySet> sets, std::size_t n, const SaConfig& config,
                std::uint64_t seed);

// CSV: step, objective, best_objective, eta, accepted
void write_sa_trace_csv(std::ostream& os, const SaResult& result);

}  // namespace revpref
