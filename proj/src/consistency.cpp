#include "revpref/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "revpref/rng.hpp"

namespace revpref {

void validate(const Observation& obs, double tol) {
  if (obs.x.size() != obs.a.size()) throw std::invalid_argument("observation: bundle/price dimension mismatch");
  std::vector<double> zero(obs.n(), 0.0);
  validate(zero, obs.a, obs.b);
  double spend = 0.0;
  for (std::size_t i = 0; i < obs.n(); ++i) {
    if (!(obs.x[i] >= -tol && obs.x[i] <= 1.0 + tol))
      throw std::invalid_argument("observation: bundle entry outside [0,1]");
    if (obs.x[i] != 0.0) spend += obs.a[i] * obs.x[i];
  }
  if (spend > obs.b + tol) throw std::invalid_argument("observation: bundle exceeds budget");
}

ConsistencySet::ConsistencySet(std::size_t n, std::vector<Row> rows, Observation source)
    : n_(n), rows_(std::move(rows)), source_(std::move(source)) {}

std::vector<double> ConsistencySet::dense_v() const {
  std::vector<double> v(rows_.size() * n_, 0.0);
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    v[r * n_ + rows_[r].i] += rows_[r].ci;
    if (rows_[r].j != rows_[r].i) v[r * n_ + rows_[r].j] += rows_[r].cj;
  }
  return v;
}

bool ConsistencySet::contains(std::span<const double> u, double gamma) const {
  if (u.size() != n_) throw std::invalid_argument("contains: dimension mismatch");
  for (const Row& r : rows_)
    if (r.ci * u[r.i] + r.cj * u[r.j] > -gamma) return false;
  return true;
}

double ConsistencySet::max_violation(std::span<const double> u) const {
  if (u.size() != n_) throw std::invalid_argument("max_violation: dimension mismatch");
  double worst = -INFINITY;
  for (const Row& r : rows_) worst = std::max(worst, r.ci * u[r.i] + r.cj * u[r.j]);
  return worst;
}

namespace {

// Row for u_i/a_i <= u_j/a_j, scaled to unit infinity-norm.
ConsistencySet::Row ratio_le(std::size_t i, double ai, std::size_t j, double aj) {
  const double ci = 1.0 / ai;
  const double cj = -1.0 / aj;
  const double scale = std::max(std::abs(ci), std::abs(cj));
  return {i, ci / scale, j, cj / scale};
}

// Row for sign * u_i <= 0.
ConsistencySet::Row sign_le_zero(std::size_t i, double sign) { return {i, sign, i, 0.0}; }

}  // namespace

ConsistencySet build_set(const Observation& obs, double tol_active, RowSet mode) {
  validate(obs, tol_active);
  const std::size_t n = obs.n();

  // Unavailable items (excluded price) impose nothing.
  std::vector<std::size_t> bought, fractional, zero;
  double spend = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (obs.x[i] != 0.0) spend += obs.a[i] * obs.x[i];
    if (is_excluded(obs.a[i])) continue;
    if (obs.x[i] >= 1.0 - tol_active)
      bought.push_back(i);
    else if (obs.x[i] <= tol_active)
      zero.push_back(i);
    else
      fractional.push_back(i);
  }
  const bool binding = std::abs(spend - obs.b) <= tol_active;

  std::vector<ConsistencySet::Row> rows;
  for (std::size_t i : bought) rows.push_back(sign_le_zero(i, -1.0));
  for (std::size_t i : fractional) rows.push_back(sign_le_zero(i, -1.0));

  if (!binding) {
    for (std::size_t i : zero) rows.push_back(sign_le_zero(i, 1.0));
    // Slack budget leaves a fractional item indifferent only at u_i = 0.
    if (mode == RowSet::kCompleted)
      for (std::size_t i : fractional) rows.push_back(sign_le_zero(i, 1.0));
  } else {
    for (std::size_t i : zero) {
      for (std::size_t j : bought) rows.push_back(ratio_le(i, obs.a[i], j, obs.a[j]));
      for (std::size_t j : fractional) rows.push_back(ratio_le(i, obs.a[i], j, obs.a[j]));
    }
    if (mode == RowSet::kCompleted) {
      for (std::size_t f : fractional)
        for (std::size_t j : bought) rows.push_back(ratio_le(f, obs.a[f], j, obs.a[j]));
      for (std::size_t p = 0; p < fractional.size(); ++p)
        for (std::size_t q = p + 1; q < fractional.size(); ++q) {
          const std::size_t i = fractional[p], j = fractional[q];
          rows.push_back(ratio_le(i, obs.a[i], j, obs.a[j]));
          rows.push_back(ratio_le(j, obs.a[j], i, obs.a[i]));
        }
    }
  }
  return ConsistencySet(n, std::move(rows), obs);
}

std::size_t count_consistent(std::span<const ConsistencySet> sets, std::span<const double> u, double gamma) {
  std::size_t c = 0;
  for (const auto& s : sets)
    if (s.contains(u, gamma)) ++c;
  return c;
}

Observation observe(std::span<const double> u, std::span<const double> a, double b) {
  Instance inst{{u.begin(), u.end()}, {a.begin(), a.end()}, b};
  return Observation{solve(inst).x, inst.a, b};
}

}  // namespace revpref
