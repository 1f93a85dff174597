#include "revpref/evaluation.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include "revpref/knapsack.hpp"

namespace revpref {

std::string to_string(AbLaw law) {
  switch (law) {
    case AbLaw::kUniform: return "uniform_i";
    case AbLaw::kDiscrete: return "discrete_ii";
    case AbLaw::kFixedA: return "fixed_a_iii";
  }
  return "?";
}

AbLaw parse_ab_law(const std::string& s) {
  if (s == "uniform_i" || s == "i" || s == "uniform") return AbLaw::kUniform;
  if (s == "discrete_ii" || s == "ii" || s == "discrete") return AbLaw::kDiscrete;
  if (s == "fixed_a_iii" || s == "iii" || s == "fixed_a") return AbLaw::kFixedA;
  throw std::invalid_argument("unknown (a,b) law '" + s + "'");
}

void Scenario::validate() const {
  if (n < 1) throw std::invalid_argument("scenario: n must be >= 1");
  if (const auto* v = std::get_if<VmfLaw>(&utility)) {
    revpref::validate(v->params);
    if (v->params.dim() != n) throw std::invalid_argument("scenario: vMF dimension != n");
  } else {
    const auto& c = std::get<CorruptLaw>(utility);
    if (c.u_star.size() != n) throw std::invalid_argument("scenario: u* dimension != n");
    if (std::abs(norm2(c.u_star) - 1.0) > 1e-9) throw std::invalid_argument("scenario: u* must have unit norm");
    if (!(c.delta >= 0.0 && c.delta <= 1.0)) throw std::invalid_argument("scenario: delta must lie in [0,1]");
    if (c.corruptor) revpref::validate(*c.corruptor);
  }
}

PriceBudget draw_ab(AbLaw law, std::size_t n, Rng& rng) {
  PriceBudget pb;
  pb.a.resize(n);
  const double nd = static_cast<double>(n);
  switch (law) {
    case AbLaw::kUniform:
      for (auto& ai : pb.a) ai = 1.0 + uniform01(rng);
      pb.b = 1.0 + (nd - 1.0) * uniform01(rng);
      break;
    case AbLaw::kDiscrete:
      for (auto& ai : pb.a) ai = (rng() >> 63) ? 2.0 : 1.0;
      pb.b = static_cast<double>(1 + std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
      break;
    case AbLaw::kFixedA:
      std::fill(pb.a.begin(), pb.a.end(), 1.0);
      pb.b = static_cast<double>(1 + std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
      break;
  }
  return pb;
}

UtilityDraw::UtilityDraw(const Scenario& s) : n_(s.n) {
  s.validate();
  if (const auto* v = std::get_if<VmfLaw>(&s.utility)) {
    sampler_.emplace(v->params);
  } else {
    corrupt_ = std::get<CorruptLaw>(s.utility);
    if (corrupt_->corruptor) sampler_.emplace(*corrupt_->corruptor);
  }
}

std::vector<double> UtilityDraw::operator()(Rng& rng) const {
  if (!corrupt_) return (*sampler_)(rng);
  if (uniform01(rng) >= corrupt_->delta) return corrupt_->u_star;
  return sampler_ ? (*sampler_)(rng) : uniform_on_sphere(n_, rng);
}

McEstimate acc(std::span<const double> u_hat, const Scenario& scenario, std::size_t draws, Rng& rng) {
  if (draws == 0) throw std::invalid_argument("acc: N must be >= 1");
  if (u_hat.size() != scenario.n) throw std::invalid_argument("acc: dimension mismatch");
  std::vector<double> u(u_hat.begin(), u_hat.end());
  if (!normalize(u)) throw std::invalid_argument("acc: u_hat must be nonzero");
  const UtilityDraw draw(scenario);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < draws; ++k) {
    const auto ut = draw(rng);
    const auto pb = draw_ab(scenario.ab_law, scenario.n, rng);
    if (build_set(observe(ut, pb.a, pb.b)).contains(u)) ++hits;
  }
  return proportion(hits, draws);
}

McEstimate gaussian_pred_accuracy(std::span<const double> mu_hat, std::span<const double> mu_star, AbLaw law,
                                  std::size_t draws, Rng& rng) {
  if (draws == 0) throw std::invalid_argument("gaussian_pred_accuracy: N must be >= 1");
  if (mu_hat.size() != mu_star.size()) throw std::invalid_argument("gaussian_pred_accuracy: dimension mismatch");
  const std::size_t n = mu_star.size();
  Instance truth{{mu_star.begin(), mu_star.end()}, {}, 0.0};
  Instance fitted{{mu_hat.begin(), mu_hat.end()}, {}, 0.0};
  std::vector<double> ratios;
  ratios.reserve(draws);
  std::size_t attempts = 0;
  while (ratios.size() < draws) {
    if (++attempts > 100 * draws)
      throw DegenerateMetric("gaussian_pred_accuracy: optimal value under mu* is 0 on every draw");
    auto pb = draw_ab(law, n, rng);
    truth.a = pb.a;
    truth.b = pb.b;
    const double best = solve(truth).value;
    if (!(best > 0.0)) continue;
    fitted.a = std::move(pb.a);
    fitted.b = pb.b;
    ratios.push_back(dot(mu_star, solve(fitted).x) / best);
  }
  return mean_and_stderr(ratios);
}

namespace {

bool same_bundle(std::span<const double> x, std::span<const double> y) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i] - y[i]) > kActiveTol) return false;
  return true;
}

}  // namespace

McEstimate coupled_mismatch(const VmfParams& theta1, const VmfParams& theta2, AbLaw law, std::size_t draws,
                            Rng& rng, Coupling coupling) {
  if (draws == 0) throw std::invalid_argument("coupled_mismatch: N must be >= 1");
  if (theta1.dim() != theta2.dim()) throw std::invalid_argument("coupled_mismatch: dimension mismatch");
  const std::size_t n = theta1.dim();
  const VmfSampler s1(theta1), s2(theta2);
  std::vector<double> u1(n), u2(n);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < draws; ++k) {
    const auto pb = draw_ab(law, n, rng);
    if (coupling == Coupling::kSharedStream) {
      const std::uint64_t seed = rng();
      Rng r1(seed), r2(seed);
      s1.sample_into(r1, u1);
      s2.sample_into(r2, u2);
    } else {
      s1.sample_into(rng, u1);
      s2.sample_into(rng, u2);
    }
    const auto x1 = solve({u1, pb.a, pb.b}).x;
    const auto x2 = solve({u2, pb.a, pb.b}).x;
    if (!same_bundle(x1, x2)) ++hits;
  }
  return proportion(hits, draws);
}

DistanceDiagnostic distance_diagnostic(const VmfParams& theta_star, AbLaw law, std::span<const double> distances,
                                       std::size_t draws_per_direction, std::size_t directions,
                                       std::uint64_t seed) {
  validate(theta_star);
  if (directions == 0) throw std::invalid_argument("distance_diagnostic: need at least one direction");
  const std::size_t n = theta_star.dim();
  DistanceDiagnostic diag;
  {
    Rng rng(derive_seed(seed, 0, "baseline"));
    diag.baseline = coupled_mismatch(theta_star, theta_star, law, draws_per_direction * directions, rng);
  }
  for (std::size_t bin = 0; bin < distances.size(); ++bin) {
    const double d = distances[bin];
    if (!(d >= 0.0 && d <= 2.0)) throw std::invalid_argument("distance_diagnostic: distance must lie in [0,2]");
    Rng rng(derive_seed(seed, bin + 1, "distance-bin"));
    // chord d on the unit sphere <=> angle 2 asin(d/2)
    const double angle = 2.0 * std::asin(0.5 * d);
    std::size_t hits = 0, total = 0;
    for (std::size_t k = 0; k < directions; ++k) {
      std::vector<double> dir = uniform_on_sphere(n, rng);
      const double proj = dot(dir, theta_star.mu);
      for (std::size_t i = 0; i < n; ++i) dir[i] -= proj * theta_star.mu[i];
      if (!normalize(dir)) continue;
      VmfParams theta = theta_star;
      for (std::size_t i = 0; i < n; ++i)
        theta.mu[i] = std::cos(angle) * theta_star.mu[i] + std::sin(angle) * dir[i];
      normalize(theta.mu);
      const auto est = coupled_mismatch(theta, theta_star, law, draws_per_direction, rng);
      hits += static_cast<std::size_t>(std::llround(est.mean * static_cast<double>(est.samples)));
      total += est.samples;
    }
    diag.bins.push_back({d, proportion(hits, total)});
  }
  return diag;
}

void write_distance_csv(std::ostream& os, const DistanceDiagnostic& diag) {
  os << "distance,mismatch,stderr\n";
  const auto old = os.precision(17);
  for (const auto& b : diag.bins) os << b.distance << ',' << b.mismatch.mean << ',' << b.mismatch.stderr_ << '\n';
  os.precision(old);
}

}  // namespace revpref
