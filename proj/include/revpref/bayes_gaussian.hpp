#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "revpref/consistency.hpp"
#include "revpref/rng.hpp"
#include "revpref/vmf.hpp"

namespace revpref {

// Uniform prior on S^{n-1} x (kappa_lo, kappa_hi).
struct PriorBox {
  double kappa_lo = 0.5;
  double kappa_hi = 20.0;

  void validate() const;
  bool contains(double kappa) const { return kappa > kappa_lo && kappa < kappa_hi; }
};

struct ProposalScales {
  double sigma_mu = 0.0;
  double sigma_kappa = 0.0;

  // sigma_mu = 0.15/sqrt(n), sigma_kappa = 0.025 (kappa_hi - kappa_lo)
  static ProposalScales defaults(std::size_t n, const PriorBox& prior);
};

struct McmcConfig {
  std::size_t iterations = 1000;  // K
  std::size_t mc_samples = 1024;  // M
  std::optional<ProposalScales> scales;  // defaults() when unset
  PriorBox prior;
  // alternate mu-only (even steps) and kappa-only (odd steps) proposals
  bool blockwise = true;
};

struct TraceEntry {
  VmfParams theta;
  double log_lik_hat = 0.0;
  bool accepted = false;
};

struct ChainState {
  VmfParams theta;
  double log_lik_hat = 0.0;
  std::size_t step_index = 0;
  std::vector<TraceEntry> trace;

  double acceptance_rate() const;
};

// M draws from vMF(theta), row-major; draw m uses its own stream derived from
// (seed, m) so that two parameters sampled with one seed are coupled.
std::vector<double> sample_vmf_batch(const VmfParams& theta, std::size_t m, std::uint64_t seed);

// log(max(c, 1/2) / M), c = number of the M draws falling in the set.
double mc_region_log_prob(const VmfParams& theta, const ConsistencySet& set, std::size_t m,
                          std::optional<std::span<const double>> shared_batch, Rng& rng);

double log_likelihood_from_batch(std::span<const double> batch, std::size_t n,
                                 std::span<const ConsistencySet> sets);

double log_likelihood(const VmfParams& theta, std::span<const ConsistencySet> sets, std::size_t m,
                      Rng& rng);

// Folds kappa back into (lo, hi) by mirror reflection at the edges.
double reflect_into(double kappa, double lo, double hi);

enum class ProposalBlock { kJoint, kMu, kKappa };

// Gaussian random-walk proposal, mu renormalized and kappa reflected. kMu and
// kKappa leave the other component unchanged.
VmfParams propose(const VmfParams& theta, const ProposalScales& scales, const PriorBox& prior, Rng& rng,
                  ProposalBlock block = ProposalBlock::kJoint);

// Same proposal from explicit perturbations.
VmfParams perturb(const VmfParams& theta, std::span<const double> eps_mu, double eps_kappa,
                  const PriorBox& prior);

// min(exp(log_ratio), 1)
double acceptance_probability(double log_ratio);

// One Metropolis-Hastings step. Both likelihood estimates are recomputed from a
// fresh common-random-number seed shared by the current and proposed parameter.
void mh_step(ChainState& state, std::span<const ConsistencySet> sets, const McmcConfig& config, Rng& rng);

VmfParams draw_from_prior(std::size_t n, const PriorBox& prior, Rng& rng);

ChainState run_chain(std::span<const ConsistencySet> sets, std::size_t n, const McmcConfig& config,
                     std::uint64_t seed);

// Normalized average of trace mean directions from index burn_in on.
std::vector<double> posterior_mean_mu(const ChainState& state, std::size_t burn_in = 0);

// CSV: step, mu_1..mu_n, kappa, log_lik_hat, accepted
void write_trace_csv(std::ostream& os, const ChainState& state);

}  // namespace revpref
