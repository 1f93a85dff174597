#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "revpref/rng.hpp"

namespace revpref {

// von Mises-Fisher parameters: mean direction mu on the unit sphere and
// concentration kappa > 0. Density is C_n(kappa) exp(kappa mu.u).
struct VmfParams {
  std::vector<double> mu;
  double kappa = 1.0;

  std::size_t dim() const { return mu.size(); }
};

class SamplerExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void validate(const VmfParams& p);

// log C_n(kappa) = (n/2-1) log kappa - (n/2) log 2pi - log I_{n/2-1}(kappa).
double log_norm_const(std::size_t n, double kappa);

double log_density(std::span<const double> u, const VmfParams& p);

// Mean resultant length A_n(kappa) = I_{n/2}(kappa) / I_{n/2-1}(kappa).
double mean_resultant_length(std::size_t n, double kappa);

// Exact sampler (rejection on the cosine to mu, uniform tangent direction,
// Householder rotation e_1 -> mu). Construct once per parameter and reuse.
class VmfSampler {
 public:
  explicit VmfSampler(VmfParams p);

  const VmfParams& params() const { return p_; }

  // Draws the cosine w = mu.u.
  double sample_cosine(Rng& rng) const;

  std::vector<double> operator()(Rng& rng) const;
  void sample_into(Rng& rng, std::span<double> out) const;

  // count draws, row-major (count x n).
  std::vector<double> sample_batch(std::size_t count, Rng& rng) const;

  static constexpr std::size_t kMaxProposals = 1'000'000;

 private:
  VmfParams p_;
  double b_ = 0.0;
  double x0_ = 0.0;
  double c_ = 0.0;
  std::vector<double> householder_;  // empty when mu == e_1
};

std::vector<double> sample(const VmfParams& p, Rng& rng);

}  // namespace revpref
