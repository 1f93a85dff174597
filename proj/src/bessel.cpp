#include "revpref/bessel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace revpref {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

// log sum_k (x/2)^(2k) / (k! Gamma(k+nu+1)), terms are all positive so the sum is
// well conditioned; partial sums are rescaled to stay inside double range.
double log_series_tail(double nu, double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  double log_scale = 0.0;
  for (int k = 1; k < 100000; ++k) {
    term *= q / (static_cast<double>(k) * (static_cast<double>(k) + nu));
    sum += term;
    if (term < sum * 1e-17 && static_cast<double>(k) > 0.5 * x) break;
    if (sum > 1e250) {
      log_scale += std::log(sum);
      term /= sum;
      sum = 1.0;
    }
  }
  return log_scale + std::log(sum);
}

// Hankel expansion of e^-x I_nu(x). Returns NaN when the series cannot reach
// double precision before its terms start to grow.
double log_scaled_asymptotic(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * x);
    if (std::abs(next) >= std::abs(term)) return std::numeric_limits<double>::quiet_NaN();
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) return std::log(sum) - 0.5 * (kLogTwoPi + std::log(x));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void check_args(double nu, double x) {
  if (!(nu > -1.0) || !std::isfinite(nu)) throw std::domain_error("bessel_i: order must be finite and > -1");
  if (!(x >= 0.0) || !std::isfinite(x)) throw std::domain_error("bessel_i: argument must be finite and >= 0");
}

}  // namespace

double log_bessel_i(double nu, double x) {
  check_args(nu, x);
  if (x == 0.0) return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (x > std::max(12.0, 2.0 * nu)) {
    const double scaled = log_scaled_asymptotic(nu, x);
    if (!std::isnan(scaled)) return x + scaled;
  }
  return nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) + log_series_tail(nu, x);
}

double bessel_i(double nu, double x) {
  const double l = log_bessel_i(nu, x);
  if (l > std::log(std::numeric_limits<double>::max())) throw std::overflow_error("bessel_i: result overflows double");
  return std::exp(l);
}

double log_bessel_i_scaled_by_power(double nu, double z) {
  check_args(nu, z);
  const double base = -nu * std::log(2.0) - std::lgamma(nu + 1.0);
  if (z == 0.0) return base;
  return base + log_series_tail(nu, z);
}

}  // namespace revpref
