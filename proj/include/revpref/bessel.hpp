#pragma once

namespace revpref {

// log I_nu(x) for the modified Bessel function of the first kind.
//
// Accepts nu > -1 and x >= 0; log I_nu(0) is 0 for nu == 0 and -inf otherwise.
// Relative accuracy of exp(result) is ~1e-13 for nu in [0, 30], x in (0, 200].
// Throws std::domain_error for negative or non-finite x or nu <= -1.
double log_bessel_i(double nu, double x);

double bessel_i(double nu, double x);

// I_nu(z) / z^nu, finite as z -> 0 (limit 1 / (2^nu Gamma(nu + 1))), in log form.
double log_bessel_i_scaled_by_power(double nu, double z);

}  // namespace revpref
