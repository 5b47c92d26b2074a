#pragma once

#include <cstddef>
#include <vector>

namespace tvent::lp {

enum class Sense { LessEqual, Equal, GreaterEqual };

struct Constraint {
  std::vector<double> coefficients;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

/// maximize c.x subject to the rows and x >= 0.
struct Problem {
  std::vector<double> objective;
  std::vector<Constraint> rows;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
  Status status = Status::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;
  /// One multiplier per row, such that c_j - sum_i duals_i A_ij <= 0 for all
  /// j at optimality (duals of <= rows are >= 0 for a maximization).
  std::vector<double> duals;
};

struct Options {
  double tolerance = 1e-9;
  std::size_t max_iterations = 100000;
};

/// Dense two-phase tableau simplex. Dantzig pricing, switching to Bland's
/// rule after a run of degenerate pivots.
Solution solve(const Problem& problem, const Options& options = {});

}  // namespace tvent::lp
