#include "revpref/vmf.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "revpref/bessel.hpp"

namespace revpref {

void validate(const VmfParams& p) {
  if (p.mu.size() < 2) throw std::invalid_argument("vmf: dimension must be at least 2");
  if (std::abs(norm2(p.mu) - 1.0) > 1e-9) throw std::invalid_argument("vmf: mean direction must have unit norm");
  if (!(p.kappa > 0.0) || !std::isfinite(p.kappa)) throw std::invalid_argument("vmf: kappa must be positive and finite");
}

double log_norm_const(std::size_t n, double kappa) {
  if (n < 2) throw std::invalid_argument("log_norm_const: n must be >= 2");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("log_norm_const: kappa must be positive");
  const double half = 0.5 * static_cast<double>(n);
  return (half - 1.0) * std::log(kappa) - half * std::log(2.0 * std::numbers::pi) - log_bessel_i(half - 1.0, kappa);
}

double log_density(std::span<const double> u, const VmfParams& p) {
  validate(p);
  if (u.size() != p.dim()) throw std::invalid_argument("log_density: dimension mismatch");
  if (std::abs(norm2(u) - 1.0) > 1e-9) throw std::invalid_argument("log_density: u must have unit norm");
  return log_norm_const(p.dim(), p.kappa) + p.kappa * dot(p.mu, u);
}

double mean_resultant_length(std::size_t n, double kappa) {
  const double half = 0.5 * static_cast<double>(n);
  return std::exp(log_bessel_i(half, kappa) - log_bessel_i(half - 1.0, kappa));
}

VmfSampler::VmfSampler(VmfParams p) : p_(std::move(p)) {
  validate(p_);
  const double m1 = static_cast<double>(p_.dim() - 1);
  const double k = p_.kappa;
  // (-2k + sqrt(4k^2 + m1^2)) / m1, rearranged to avoid cancellation at large k
  b_ = m1 / (2.0 * k + std::sqrt(4.0 * k * k + m1 * m1));
  x0_ = (1.0 - b_) / (1.0 + b_);
  c_ = k * x0_ + m1 * std::log(1.0 - x0_ * x0_);

  std::vector<double> h = p_.mu;
  h[0] -= 1.0;
  const double hh = dot(h, h);
  if (hh > 1e-30) {
    const double s = std::sqrt(hh);
    for (auto& v : h) v /= s;
    householder_ = std::move(h);
  }
}

double VmfSampler::sample_cosine(Rng& rng) const {
  const double m1 = static_cast<double>(p_.dim() - 1);
  std::gamma_distribution<double> ga(0.5 * m1, 1.0);
  for (std::size_t it = 0; it < kMaxProposals; ++it) {
    const double g1 = ga(rng);
    const double g2 = ga(rng);
    const double z = g1 / (g1 + g2);
    const double w = (1.0 - (1.0 + b_) * z) / (1.0 - (1.0 - b_) * z);
    const double u = uniform01(rng);
    if (p_.kappa * w + m1 * std::log(1.0 - x0_ * w) - c_ >= std::log(u)) return w;
  }
  throw SamplerExhausted("vmf: rejection sampler exceeded " + std::to_string(kMaxProposals) + " proposals");
}

void VmfSampler::sample_into(Rng& rng, std::span<double> out) const {
  const std::size_t n = p_.dim();
  const double w = sample_cosine(rng);
  std::normal_distribution<double> gauss;
  double ss = 0.0;
  do {
    ss = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      out[i] = gauss(rng);
      ss += out[i] * out[i];
    }
  } while (!(ss > 0.0));
  const double r = std::sqrt(std::max(0.0, 1.0 - w * w)) / std::sqrt(ss);
  out[0] = w;
  for (std::size_t i = 1; i < n; ++i) out[i] *= r;

  if (!householder_.empty()) {
    const double proj = 2.0 * dot(householder_, out);
    for (std::size_t i = 0; i < n; ++i) out[i] -= proj * householder_[i];
  }
}

std::vector<double> VmfSampler::operator()(Rng& rng) const {
  std::vector<double> out(p_.dim());
  sample_into(rng, out);
  return out;
}

std::vector<double> VmfSampler::sample_batch(std::size_t count, Rng& rng) const {
  const std::size_t n = p_.dim();
  std::vector<double> out(count * n);
  for (std::size_t m = 0; m < count; ++m) sample_into(rng, std::span<double>(out).subspan(m * n, n));
  return out;
}

std::vector<double> sample(const VmfParams& p, Rng& rng) { return VmfSampler(p)(rng); }

}  // namespace revpref
