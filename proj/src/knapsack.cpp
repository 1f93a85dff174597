#include "revpref/knapsack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "revpref/rng.hpp"

namespace revpref {

void validate(std::span<const double> u, std::span<const double> a, double b) {
  if (u.size() != a.size() || u.empty())
    throw std::invalid_argument("knapsack: utility/price dimension mismatch (" +
                                std::to_string(u.size()) + " vs " + std::to_string(a.size()) + ")");
  for (double ai : a)
    if (!(ai > 0.0) || std::isnan(ai)) throw std::invalid_argument("knapsack: prices must be positive");
  for (double ui : u)
    if (!std::isfinite(ui)) throw std::invalid_argument("knapsack: non-finite utility");
  if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("knapsack: budget must be a finite nonnegative number");
}

SolveOutcome solve(const Instance& inst) {
  validate(inst.u, inst.a, inst.b);
  const std::size_t n = inst.n();

  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (inst.u[i] > 0.0 && !is_excluded(inst.a[i])) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return inst.u[i] / inst.a[i] > inst.u[j] / inst.a[j];
  });

  SolveOutcome out;
  out.x.assign(n, 0.0);

  double total = 0.0;
  for (std::size_t i : order) total += inst.a[i];
  if (inst.b >= total) {
    for (std::size_t i : order) out.x[i] = 1.0;
  } else {
    double remaining = inst.b;
    for (std::size_t i : order) {
      const double ratio = inst.u[i] / inst.a[i];
      if (inst.a[i] <= remaining) {
        out.x[i] = 1.0;
        remaining -= inst.a[i];
        out.threshold = ratio;
        if (remaining <= 0.0) break;
      } else {
        out.x[i] = remaining / inst.a[i];
        if (out.x[i] > 0.0) out.fractional_index = i;
        out.threshold = ratio;
        break;
      }
    }
  }
  out.value = dot(inst.u, out.x);
  return out;
}

bool is_optimal(std::span<const double> x, const Instance& inst, double tol) {
  validate(inst.u, inst.a, inst.b);
  if (x.size() != inst.n()) throw std::invalid_argument("is_optimal: bundle dimension mismatch");
  for (double xi : x)
    if (xi < -tol || xi > 1.0 + tol) throw InfeasibleBundle("is_optimal: bundle outside [0,1]^n");
  double spend = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) spend += inst.a[i] * x[i];
  if (spend > inst.b + tol) throw InfeasibleBundle("is_optimal: bundle exceeds budget");
  return dot(inst.u, x) >= solve(inst).value - tol;
}

}  // namespace revpref
