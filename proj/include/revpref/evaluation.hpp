#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "revpref/consistency.hpp"
#include "revpref/rng.hpp"
#include "revpref/stats.hpp"
#include "revpref/vmf.hpp"

namespace revpref {

// Laws for the price vector and budget.
enum class AbLaw {
  kUniform,   // (i)   a ~ Unif([1,2]^n), b ~ Unif([1,n])
  kDiscrete,  // (ii)  a ~ Unif({1,2}^n), b ~ Unif({1,...,n})
  kFixedA,    // (iii) a = (1,...,1),     b ~ Unif({1,...,n})
};

std::string to_string(AbLaw law);
AbLaw parse_ab_law(const std::string& s);

struct VmfLaw {
  VmfParams params;
};

// u = u_star w.p. 1 - delta, otherwise drawn from the corruptor (uniform on the
// sphere when unset).
struct CorruptLaw {
  std::vector<double> u_star;
  double delta = 0.1;
  std::optional<VmfParams> corruptor;
};

using UtilityLaw = std::variant<VmfLaw, CorruptLaw>;

struct Scenario {
  std::size_t n = 3;
  AbLaw ab_law = AbLaw::kUniform;
  UtilityLaw utility;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PriceBudget {
  std::vector<double> a;
  double b = 0.0;
};

PriceBudget draw_ab(AbLaw law, std::size_t n, Rng& rng);

// Draws utilities from a scenario's law; keeps the vMF sampler setup cached.
class UtilityDraw {
 public:
  explicit UtilityDraw(const Scenario& s);
  std::vector<double> operator()(Rng& rng) const;

 private:
  std::size_t n_;
  std::optional<CorruptLaw> corrupt_;
  std::optional<VmfSampler> sampler_;
};

class DegenerateMetric : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fraction of N fresh observations whose consistency set contains u_hat (renormalized).
McEstimate acc(std::span<const double> u_hat, const Scenario& scenario, std::size_t draws, Rng& rng);

// Mean over fresh (a, b) of (mu* . x~) / (mu* . x*), x~ optimal for mu_hat and x*
// for mu*. Draws with mu* . x* == 0 are resampled (at most 100 N attempts).
McEstimate gaussian_pred_accuracy(std::span<const double> mu_hat, std::span<const double> mu_star,
                                  AbLaw law, std::size_t draws, Rng& rng);

enum class Coupling {
  kIndependent,   // u_1, u_2 from independent streams
  kSharedStream,  // u_1, u_2 from the same per-draw stream
};

// P(x*(u_1, a, b) != x*(u_2, a, b)) with u_k ~ vMF(theta_k) and shared (a, b).
McEstimate coupled_mismatch(const VmfParams& theta1, const VmfParams& theta2, AbLaw law, std::size_t draws,
                            Rng& rng, Coupling coupling = Coupling::kIndependent);

struct DistanceBin {
  double distance = 0.0;
  McEstimate mismatch;
};

struct DistanceDiagnostic {
  McEstimate baseline;  // same-parameter independent coupling at theta*
  std::vector<DistanceBin> bins;
};

// Parameters at ||theta - theta*||_2 = d, moving mu along a random great circle
// (chord length d) with kappa fixed; averaged over `directions` random directions.
DistanceDiagnostic distance_diagnostic(const VmfParams& theta_star, AbLaw law, std::span<const double> distances,
                                       std::size_t draws_per_direction, std::size_t directions,
                                       std::uint64_t seed);

// CSV: distance, mismatch, stderr
void write_distance_csv(std::ostream& os, const DistanceDiagnostic& diag);

}  // namespace revpref
