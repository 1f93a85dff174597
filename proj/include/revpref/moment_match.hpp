#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "revpref/consistency.hpp"
#include "revpref/rng.hpp"
#include "revpref/vmf.hpp"

namespace revpref {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// P(u_i > 0) under vMF(mu, kappa) on S^{n-1}; depends on mu only through mu_i.
// Adaptive Simpson over the polar angle, absolute tolerance 1e-8.
double marginal_positive_prob(double mu_i, double kappa, std::size_t n);

// Bisection inverse of the (increasing) forward map; clamps to -1/+1 outside its range.
double invert_marginal(double p_hat, double kappa, std::size_t n);

// Cached forward map on a grid of mu_i values.
struct MarginalTable {
  std::size_t n = 0;
  double kappa = 0.0;
  std::vector<double> mu;
  std::vector<double> p;

  static MarginalTable build(std::size_t n, double kappa, std::size_t points);
  // Throws std::runtime_error unless p is strictly increasing and inside (0, 1).
  void check_monotone() const;
  double interpolate(double mu_i) const;

  void write_csv(std::ostream& os) const;
  static MarginalTable read_csv(std::istream& is, std::size_t n, double kappa);
};

struct Design {
  std::vector<double> a;
  double b = 0.0;
};

// All-ones prices and budget n: the bundle reveals sign(u_i) for every i.
Design design_full(std::size_t n);

struct BlockDesign {
  std::vector<double> a;            // 1 on the block, kExcludedPrice elsewhere
  std::vector<std::size_t> block;   // revealed coordinates
};

// Splits 1..n into consecutive blocks of size ceil(b_lower).
std::vector<BlockDesign> design_budgeted(std::size_t n, double b_lower);

struct DesignedObservation {
  Observation obs;
  std::vector<std::size_t> revealed;
};

struct MuEstimate {
  std::vector<double> mu;
  std::vector<double> p_hat;
  std::vector<double> mu_raw;  // before renormalization
  bool degenerate = false;     // raw estimate was the zero vector; mu set to e_1
};

// Per-coordinate sign frequencies, inverted through the forward map, renormalized.
// Throws std::invalid_argument if some coordinate is never revealed.
MuEstimate estimate_mu(const std::vector<DesignedObservation>& data, double kappa, std::size_t n);

// T observations of agents with u ~ vMF(params) under design_full.
std::vector<DesignedObservation> simulate_design_full(const VmfParams& params, std::size_t t, Rng& rng);

// T observations cycling through the blocks of design_budgeted; b ~ Unif[b_lower, b_upper].
std::vector<DesignedObservation> simulate_design_budgeted(const VmfParams& params, std::size_t t,
                                                          double b_lower, double b_upper, Rng& rng);

}  // namespace revpref
