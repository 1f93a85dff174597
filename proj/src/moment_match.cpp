#include "revpref/moment_match.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "revpref/bessel.hpp"

namespace revpref {

namespace {

constexpr double kQuadTol = 1e-8;
constexpr int kMaxDepth = 30;

struct Simpson {
  // f, lo, hi form one panel with midpoint value fm
  template <class F>
  static double adapt(const F& f, double lo, double hi, double flo, double fmid, double fhi, double whole,
                      double tol, int depth, bool& ok) {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid);
    const double rm = 0.5 * (mid + hi);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    const double diff = left + right - whole;
    if (std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    if (depth >= kMaxDepth) {
      ok = false;
      return left + right + diff / 15.0;
    }
    return adapt(f, lo, mid, flo, flm, fmid, left, 0.5 * tol, depth + 1, ok) +
           adapt(f, mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth + 1, ok);
  }

  template <class F>
  static double integrate(const F& f, double lo, double hi, double tol, bool& ok) {
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fmid = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    ok = true;
    return adapt(f, lo, hi, flo, fmid, fhi, whole, tol, 0, ok);
  }
};

}  // namespace

double marginal_positive_prob(double mu_i, double kappa, std::size_t n) {
  if (n < 2) throw std::invalid_argument("marginal_positive_prob: n must be >= 2");
  if (!(std::abs(mu_i) <= 1.0)) throw std::invalid_argument("marginal_positive_prob: |mu_i| must be <= 1");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("marginal_positive_prob: kappa must be positive");

  const double nd = static_cast<double>(n);
  const double nu = 0.5 * (nd - 3.0);
  const double cos_phi = mu_i;
  const double sin_phi = std::sqrt(std::max(0.0, 1.0 - mu_i * mu_i));
  // I_nu(k sin(phi) sin(psi)) / sin(phi)^nu is rewritten as
  // [I_nu(z) / z^nu] * (k sin(psi))^nu, which stays finite at sin(phi) = 0.
  const double log_const = 0.5 * std::log(kappa / (2.0 * std::numbers::pi)) + nu * std::log(kappa) -
                           log_bessel_i(0.5 * nd - 1.0, kappa);

  const auto integrand = [&](double psi) {
    const double s = std::sin(psi);
    if (n > 2 && s <= 0.0) return 0.0;
    double l = log_const + kappa * cos_phi * std::cos(psi) +
               log_bessel_i_scaled_by_power(nu, kappa * sin_phi * s);
    if (n > 2) l += (nd - 2.0) * std::log(s);
    return std::exp(l);
  };

  bool ok = true;
  const double p = Simpson::integrate(integrand, 0.0, 0.5 * std::numbers::pi, kQuadTol, ok);
  if (!ok) throw QuadratureError("marginal_positive_prob: adaptive Simpson did not converge");
  return p;
}

double invert_marginal(double p_hat, double kappa, std::size_t n) {
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw std::invalid_argument("invert_marginal: p_hat must lie in [0,1]");
  double lo = -1.0;
  double hi = 1.0;
  if (p_hat <= marginal_positive_prob(lo, kappa, n)) return -1.0;
  if (p_hat >= marginal_positive_prob(hi, kappa, n)) return 1.0;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (marginal_positive_prob(mid, kappa, n) < p_hat)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

MarginalTable MarginalTable::build(std::size_t n, double kappa, std::size_t points) {
  if (points < 2) throw std::invalid_argument("MarginalTable: need at least 2 grid points");
  MarginalTable t;
  t.n = n;
  t.kappa = kappa;
  t.mu.resize(points);
  t.p.resize(points);
  for (std::size_t k = 0; k < points; ++k) {
    t.mu[k] = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(points - 1);
    t.p[k] = marginal_positive_prob(t.mu[k], kappa, n);
  }
  return t;
}

void MarginalTable::check_monotone() const {
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!(p[k] > 0.0 && p[k] < 1.0))
      throw std::runtime_error("MarginalTable: probability outside (0,1) at mu=" + std::to_string(mu[k]));
    if (k > 0 && !(p[k] > p[k - 1]))
      throw std::runtime_error("MarginalTable: forward map not strictly increasing at mu=" + std::to_string(mu[k]));
  }
}

double MarginalTable::interpolate(double mu_i) const {
  if (mu.empty()) throw std::logic_error("MarginalTable: empty table");
  if (mu_i <= mu.front()) return p.front();
  if (mu_i >= mu.back()) return p.back();
  std::size_t k = 1;
  while (mu[k] < mu_i) ++k;
  const double w = (mu_i - mu[k - 1]) / (mu[k] - mu[k - 1]);
  return (1.0 - w) * p[k - 1] + w * p[k];
}

void MarginalTable::write_csv(std::ostream& os) const {
  os << "mu,p\n";
  const auto old = os.precision(17);
  for (std::size_t k = 0; k < mu.size(); ++k) os << mu[k] << ',' << p[k] << '\n';
  os.precision(old);
}

MarginalTable MarginalTable::read_csv(std::istream& is, std::size_t n, double kappa) {
  MarginalTable t;
  t.n = n;
  t.kappa = kappa;
  std::string line;
  if (!std::getline(is, line) || line != "mu,p") throw std::runtime_error("MarginalTable: missing 'mu,p' header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("MarginalTable: malformed row '" + line + "'");
    t.mu.push_back(std::stod(line.substr(0, comma)));
    t.p.push_back(std::stod(line.substr(comma + 1)));
  }
  return t;
}

Design design_full(std::size_t n) {
  if (n < 1) throw std::invalid_argument("design_full: n must be >= 1");
  return {std::vector<double>(n, 1.0), static_cast<double>(n)};
}

std::vector<BlockDesign> design_budgeted(std::size_t n, double b_lower) {
  if (n < 1) throw std::invalid_argument("design_budgeted: n must be >= 1");
  if (!(b_lower >= 1.0)) throw std::invalid_argument("design_budgeted: b_lower must be >= 1");
  const std::size_t size = static_cast<std::size_t>(std::ceil(b_lower));
  std::vector<BlockDesign> out;
  for (std::size_t start = 0; start < n; start += size) {
    BlockDesign d;
    d.a.assign(n, kExcludedPrice);
    for (std::size_t i = start; i < std::min(n, start + size); ++i) {
      d.a[i] = 1.0;
      d.block.push_back(i);
    }
    out.push_back(std::move(d));
  }
  return out;
}

MuEstimate estimate_mu(const std::vector<DesignedObservation>& data, double kappa, std::size_t n) {
  std::vector<std::size_t> seen(n, 0), positive(n, 0);
  for (const auto& d : data) {
    if (d.obs.n() != n) throw std::invalid_argument("estimate_mu: observation dimension mismatch");
    for (std::size_t i : d.revealed) {
      if (i >= n) throw std::invalid_argument("estimate_mu: revealed index out of range");
      ++seen[i];
      if (d.obs.x[i] > kActiveTol) ++positive[i];
    }
  }
  MuEstimate est;
  est.p_hat.resize(n);
  est.mu_raw.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i] == 0) throw std::invalid_argument("estimate_mu: coordinate " + std::to_string(i) + " never observed");
    est.p_hat[i] = static_cast<double>(positive[i]) / static_cast<double>(seen[i]);
    est.mu_raw[i] = invert_marginal(est.p_hat[i], kappa, n);
  }
  est.mu = est.mu_raw;
  // below the inversion tolerance the direction is noise
  if (norm2(est.mu) < 1e-6 || !normalize(est.mu)) {
    std::cerr << "warning: estimate_mu: all sign frequencies invert to 0; returning e_1\n";
    est.mu.assign(n, 0.0);
    est.mu[0] = 1.0;
    est.degenerate = true;
  }
  return est;
}

std::vector<DesignedObservation> simulate_design_full(const VmfParams& params, std::size_t t, Rng& rng) {
  const std::size_t n = params.dim();
  const VmfSampler sampler(params);
  const Design d = design_full(n);
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::vector<DesignedObservation> out;
  out.reserve(t);
  for (std::size_t k = 0; k < t; ++k) out.push_back({observe(sampler(rng), d.a, d.b), all});
  return out;
}

std::vector<DesignedObservation> simulate_design_budgeted(const VmfParams& params, std::size_t t,
                                                          double b_lower, double b_upper, Rng& rng) {
  const auto blocks = design_budgeted(params.dim(), b_lower);
  const VmfSampler sampler(params);
  std::vector<DesignedObservation> out;
  out.reserve(t);
  for (std::size_t k = 0; k < t; ++k) {
    const auto& blk = blocks[k % blocks.size()];
    const double b = b_lower + (b_upper - b_lower) * uniform01(rng);
    out.push_back({observe(sampler(rng), blk.a, b), blk.block});
  }
  return out;
}

}  // namespace revpref
