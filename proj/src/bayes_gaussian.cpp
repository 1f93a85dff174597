#include "revpref/bayes_gaussian.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace revpref {

void PriorBox::validate() const {
  if (!(kappa_lo > 0.0) || !(kappa_hi > kappa_lo) || !std::isfinite(kappa_hi))
    throw std::invalid_argument("prior box: need 0 < kappa_lo < kappa_hi < inf");
}

ProposalScales ProposalScales::defaults(std::size_t n, const PriorBox& prior) {
  return {0.15 / std::sqrt(static_cast<double>(n)), 0.25 * (prior.kappa_hi - prior.kappa_lo) / 10.0};
}

double ChainState::acceptance_rate() const {
  if (trace.size() <= 1) return 0.0;
  std::size_t acc = 0;
  for (std::size_t k = 1; k < trace.size(); ++k) acc += trace[k].accepted ? 1 : 0;
  return static_cast<double>(acc) / static_cast<double>(trace.size() - 1);
}

std::vector<double> sample_vmf_batch(const VmfParams& theta, std::size_t m, std::uint64_t seed) {
  const VmfSampler sampler(theta);
  const std::size_t n = theta.dim();
  std::vector<double> out(m * n);
  for (std::size_t k = 0; k < m; ++k) {
    Rng stream(splitmix64(seed ^ splitmix64(k)));
    sampler.sample_into(stream, std::span<double>(out).subspan(k * n, n));
  }
  return out;
}

namespace {

double floored_log_frac(std::size_t hits, std::size_t m) {
  const double c = hits == 0 ? 0.5 : static_cast<double>(hits);
  return std::log(c / static_cast<double>(m));
}

}  // namespace

double mc_region_log_prob(const VmfParams& theta, const ConsistencySet& set, std::size_t m,
                          std::optional<std::span<const double>> shared_batch, Rng& rng) {
  if (m == 0) throw std::invalid_argument("mc_region_log_prob: M must be >= 1");
  const std::size_t n = theta.dim();
  std::vector<double> own;
  std::span<const double> batch;
  if (shared_batch) {
    if (shared_batch->size() != m * n) throw std::invalid_argument("mc_region_log_prob: batch size != M*n");
    batch = *shared_batch;
  } else {
    own = sample_vmf_batch(theta, m, rng());
    batch = own;
  }
  std::size_t hits = 0;
  for (std::size_t k = 0; k < m; ++k)
    if (set.contains(batch.subspan(k * n, n))) ++hits;
  return floored_log_frac(hits, m);
}

double log_likelihood_from_batch(std::span<const double> batch, std::size_t n,
                                 std::span<const ConsistencySet> sets) {
  const std::size_t m = batch.size() / n;
  double total = 0.0;
  for (const auto& set : sets) {
    std::size_t hits = 0;
    for (std::size_t k = 0; k < m; ++k)
      if (set.contains(batch.subspan(k * n, n))) ++hits;
    total += floored_log_frac(hits, m);
  }
  return total;
}

double log_likelihood(const VmfParams& theta, std::span<const ConsistencySet> sets, std::size_t m,
                      Rng& rng) {
  if (m == 0) throw std::invalid_argument("log_likelihood: M must be >= 1");
  if (sets.empty()) return 0.0;
  const auto batch = sample_vmf_batch(theta, m, rng());
  return log_likelihood_from_batch(batch, theta.dim(), sets);
}

double reflect_into(double kappa, double lo, double hi) {
  const double width = hi - lo;
  double y = std::fmod(kappa - lo, 2.0 * width);
  if (y < 0.0) y += 2.0 * width;
  if (y > width) y = 2.0 * width - y;
  return lo + y;
}

VmfParams perturb(const VmfParams& theta, std::span<const double> eps_mu, double eps_kappa,
                  const PriorBox& prior) {
  if (eps_mu.size() != theta.dim()) throw std::invalid_argument("perturb: dimension mismatch");
  VmfParams out = theta;
  for (std::size_t i = 0; i < out.mu.size(); ++i) out.mu[i] += eps_mu[i];
  if (!normalize(out.mu)) throw std::domain_error("perturb: perturbed mean direction is zero");
  if (eps_kappa != 0.0) out.kappa = reflect_into(theta.kappa + eps_kappa, prior.kappa_lo, prior.kappa_hi);
  return out;
}

VmfParams propose(const VmfParams& theta, const ProposalScales& scales, const PriorBox& prior, Rng& rng,
                  ProposalBlock block) {
  if (!(scales.sigma_mu > 0.0) || !(scales.sigma_kappa > 0.0))
    throw std::invalid_argument("propose: proposal scales must be positive");
  std::normal_distribution<double> gauss;
  std::vector<double> eps(theta.dim());
  if (block == ProposalBlock::kKappa) {
    VmfParams out = theta;
    out.kappa = reflect_into(theta.kappa + scales.sigma_kappa * gauss(rng), prior.kappa_lo, prior.kappa_hi);
    return out;
  }
  for (;;) {
    for (auto& e : eps) e = scales.sigma_mu * gauss(rng);
    const double ek = block == ProposalBlock::kMu ? 0.0 : scales.sigma_kappa * gauss(rng);
    double sq = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) sq += (theta.mu[i] + eps[i]) * (theta.mu[i] + eps[i]);
    if (sq > 0.0) return perturb(theta, eps, ek, prior);
  }
}

double acceptance_probability(double log_ratio) {
  if (std::isnan(log_ratio)) return 0.0;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

void mh_step(ChainState& state, std::span<const ConsistencySet> sets, const McmcConfig& config, Rng& rng) {
  const std::size_t n = state.theta.dim();
  const ProposalScales scales = config.scales.value_or(ProposalScales::defaults(n, config.prior));
  ProposalBlock block = ProposalBlock::kJoint;
  if (config.blockwise) block = state.step_index % 2 == 0 ? ProposalBlock::kMu : ProposalBlock::kKappa;
  VmfParams candidate = propose(state.theta, scales, config.prior, rng, block);

  const std::uint64_t crn_seed = rng();
  double ll_new = 0.0;
  double ll_old = 0.0;
  if (!sets.empty()) {
    ll_new = log_likelihood_from_batch(sample_vmf_batch(candidate, config.mc_samples, crn_seed), n, sets);
    ll_old = log_likelihood_from_batch(sample_vmf_batch(state.theta, config.mc_samples, crn_seed), n, sets);
  }
  const bool accepted = uniform01(rng) < acceptance_probability(ll_new - ll_old);
  if (accepted) {
    state.theta = std::move(candidate);
    state.log_lik_hat = ll_new;
  } else {
    state.log_lik_hat = ll_old;
  }
  ++state.step_index;
  state.trace.push_back({state.theta, state.log_lik_hat, accepted});
}

VmfParams draw_from_prior(std::size_t n, const PriorBox& prior, Rng& rng) {
  VmfParams p;
  p.mu = uniform_on_sphere(n, rng);
  p.kappa = prior.kappa_lo + (prior.kappa_hi - prior.kappa_lo) * uniform01(rng);
  if (!prior.contains(p.kappa)) p.kappa = 0.5 * (prior.kappa_lo + prior.kappa_hi);
  return p;
}

ChainState run_chain(std::span<const ConsistencySet> sets, std::size_t n, const McmcConfig& config,
                     std::uint64_t seed) {
  config.prior.validate();
  if (config.mc_samples == 0) throw std::invalid_argument("run_chain: M must be >= 1");
  for (const auto& s : sets)
    if (s.dim() != n) throw std::invalid_argument("run_chain: consistency set dimension mismatch");

  Rng rng(seed);
  ChainState state;
  state.theta = draw_from_prior(n, config.prior, rng);
  state.log_lik_hat = log_likelihood(state.theta, sets, config.mc_samples, rng);
  state.trace.reserve(config.iterations + 1);
  state.trace.push_back({state.theta, state.log_lik_hat, true});
  for (std::size_t k = 0; k < config.iterations; ++k) mh_step(state, sets, config, rng);
  return state;
}

std::vector<double> posterior_mean_mu(const ChainState& state, std::size_t burn_in) {
  if (state.trace.empty()) return state.theta.mu;
  std::vector<double> acc(state.theta.dim(), 0.0);
  for (std::size_t k = std::min(burn_in, state.trace.size() - 1); k < state.trace.size(); ++k)
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += state.trace[k].theta.mu[i];
  if (!normalize(acc)) return state.theta.mu;
  return acc;
}

void write_trace_csv(std::ostream& os, const ChainState& state) {
  const std::size_t n = state.theta.dim();
  os << "step";
  for (std::size_t i = 1; i <= n; ++i) os << ",mu_" << i;
  os << ",kappa,log_lik_hat,accepted\n";
  const auto old = os.precision(17);
  for (std::size_t k = 0; k < state.trace.size(); ++k) {
    const auto& e = state.trace[k];
    os << k;
    for (double v : e.theta.mu) os << ',' << v;
    os << ',' << e.theta.kappa << ',' << e.log_lik_hat << ',' << (e.accepted ? 1 : 0) << '\n';
  }
  os.precision(old);
}

}  // namespace revpref
