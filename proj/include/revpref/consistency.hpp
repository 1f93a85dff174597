#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "revpref/knapsack.hpp"

namespace revpref {

inline constexpr double kActiveTol = 1e-7;

// One observed purchase: the bundle x*, the prices a and the budget b.
struct Observation {
  std::vector<double> x;
  std::vector<double> a;
  double b = 0.0;

  std::size_t n() const { return x.size(); }
};

// Throws std::invalid_argument unless x lies in [0,1]^n, a > 0, b >= 0 and a.x <= b + tol.
void validate(const Observation& obs, double tol = kActiveTol);

enum class RowSet {
  kCompleted,  // full KKT characterization (default)
  kLiteral,    // only the three classical conditions; necessary, not sufficient
};

// The set of unit utilities under which an observed bundle is optimal, as V u <= w.
//
// Every row has at most two nonzero coefficients and unit infinity-norm, so a
// margin gamma shrinks all rows by a comparable amount.
class ConsistencySet {
 public:
  struct Row {
    std::size_t i;
    double ci;
    std::size_t j;  // equal to i for single-coefficient rows (cj == 0)
    double cj;
  };

  ConsistencySet() = default;
  ConsistencySet(std::size_t n, std::vector<Row> rows, Observation source);

  std::size_t dim() const { return n_; }
  std::size_t num_rows() const { return rows_.size(); }
  const std::vector<Row>& rows() const { return rows_; }
  const Observation& source() const { return source_; }

  // Dense row-major V (num_rows x dim) and right-hand side w (all zero).
  std::vector<double> dense_v() const;
  std::vector<double> w() const { return std::vector<double>(rows_.size(), 0.0); }

  // V u <= w - gamma componentwise, evaluated without tolerance.
  bool contains(std::span<const double> u, double gamma = 0.0) const;

  // Largest row value of V u - w; membership at margin gamma iff this is <= -gamma.
  double max_violation(std::span<const double> u) const;

 private:
  std::size_t n_ = 0;
  std::vector<Row> rows_;
  Observation source_;
};

ConsistencySet build_set(const Observation& obs, double tol_active = kActiveTol,
                         RowSet mode = RowSet::kCompleted);

// Number of sets containing u at margin gamma.
std::size_t count_consistent(std::span<const ConsistencySet> sets, std::span<const double> u,
                             double gamma = 0.0);

// Builds the observation (x*, a, b) produced by an agent with utility u.
Observation observe(std::span<const double> u, std::span<const double> a, double b);

}  // namespace revpref
