#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace revpref {

// Prices at or above this value mark an item as unavailable ("infinite" price).
inline constexpr double kExcludedPrice = 1e9;
inline constexpr double kFeasTol = 1e-9;

inline bool is_excluded(double price) { return price >= kExcludedPrice; }

// One fractional knapsack problem: max u.x s.t. a.x <= b, 0 <= x <= 1.
struct Instance {
  std::vector<double> u;
  std::vector<double> a;
  double b = 0.0;

  std::size_t n() const { return u.size(); }
};

struct SolveOutcome {
  std::vector<double> x;
  double value = 0.0;
  // Ratio u_i/a_i at which the budget binds; 0 when the budget is slack.
  double threshold = 0.0;
  std::optional<std::size_t> fractional_index;
};

class InfeasibleBundle : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Throws std::invalid_argument on dimension mismatch, non-positive price, or
// negative/non-finite budget.
void validate(std::span<const double> u, std::span<const double> a, double b);

// Greedy by descending u_i/a_i over items with u_i > 0 (ties by ascending index).
// Items with u_i <= 0 or an excluded price are never bought.
SolveOutcome solve(const Instance& inst);

// True iff u.x is within tol of the optimal value. Throws InfeasibleBundle when x
// violates the box or the budget by more than tol.
bool is_optimal(std::span<const double> x, const Instance& inst, double tol = kFeasTol);

}  // namespace revpref
