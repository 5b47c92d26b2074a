#include "tvent/simplex.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "tvent/error.hpp"

namespace tvent::lp {

namespace {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0), basis_(rows) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double rhs(std::size_t r) const { return at(r, cols_); }
  // objective row stores reduced costs d_j = c_j - z_j (maximization)
  double& cost(std::size_t c) { return at(rows_, c); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t r, std::size_t c) {
    const double inv = 1.0 / at(r, c);
    for (std::size_t j = 0; j <= cols_; ++j) at(r, j) *= inv;
    at(r, c) = 1.0;
    for (std::size_t i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    basis_[r] = c;
  }

  /// Loads reduced costs for `costs` over the current basis.
  void price(const std::vector<double>& costs) {
    for (std::size_t j = 0; j <= cols_; ++j) cost(j) = j < cols_ ? costs[j] : 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double cb = costs[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) cost(j) -= cb * at(r, j);
    }
  }

  /// Runs the simplex method on columns [0, allowed). Returns the status.
  Status optimize(std::size_t allowed, const Options& opt, std::size_t& iterations) {
    std::size_t degenerate_run = 0;
    while (iterations < opt.max_iterations) {
      const bool bland = degenerate_run > 50;
      std::size_t enter = cols_;
      double best = opt.tolerance;
      for (std::size_t j = 0; j < allowed; ++j) {
        const double d = cost(j);
        if (d > best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter == cols_) return Status::Optimal;

      std::size_t leave = rows_;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows_; ++r) {
        const double a = at(r, enter);
        if (a <= opt.tolerance) continue;
        const double q = rhs(r) / a;
        if (q < ratio - 1e-12 ||
            (q <= ratio + 1e-12 && leave < rows_ && basis_[r] < basis_[leave])) {
          ratio = q;
          leave = r;
        }
      }
      if (leave == rows_) return Status::Unbounded;
      degenerate_run = ratio <= 1e-12 ? degenerate_run + 1 : 0;
      pivot(leave, enter);
      ++iterations;
    }
    return Status::IterationLimit;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
};

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  const std::size_t n = problem.objective.size();
  const std::size_t m = problem.rows.size();
  for (const auto& row : problem.rows)
    if (row.coefficients.size() != n)
      throw DomainError("constraint width does not match objective");

  // Normalize to non-negative right-hand sides.
  std::vector<double> sign(m, 1.0);
  std::vector<Sense> sense(m);
  std::size_t slacks = 0;
  std::size_t artificials = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sense[i] = problem.rows[i].sense;
    if (problem.rows[i].rhs < 0.0) {
      sign[i] = -1.0;
      if (sense[i] == Sense::LessEqual) sense[i] = Sense::GreaterEqual;
      else if (sense[i] == Sense::GreaterEqual) sense[i] = Sense::LessEqual;
    }
    if (sense[i] != Sense::Equal) ++slacks;
    if (sense[i] != Sense::LessEqual) ++artificials;
  }

  const std::size_t cols = n + slacks + artificials;
  const std::size_t first_artificial = n + slacks;
  Tableau tab(m, cols);
  std::size_t next_slack = n;
  std::size_t next_art = first_artificial;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& row = problem.rows[i];
    for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = sign[i] * row.coefficients[j];
    tab.rhs(i) = sign[i] * row.rhs;
    if (sense[i] == Sense::LessEqual) {
      tab.at(i, next_slack) = 1.0;
      tab.basis()[i] = next_slack++;
    } else {
      if (sense[i] == Sense::GreaterEqual) tab.at(i, next_slack++) = -1.0;
      tab.at(i, next_art) = 1.0;
      tab.basis()[i] = next_art++;
    }
  }

  Solution sol;
  std::size_t iterations = 0;

  if (artificials > 0) {
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t j = first_artificial; j < cols; ++j) phase1[j] = -1.0;
    tab.price(phase1);
    const Status s = tab.optimize(cols, options, iterations);
    if (s == Status::IterationLimit) {
      sol.status = s;
      return sol;
    }
    double infeasibility = 0.0;
    for (std::size_t r = 0; r < m; ++r)
      if (tab.basis()[r] >= first_artificial) infeasibility += tab.rhs(r);
    double scale = 1.0;
    for (std::size_t r = 0; r < m; ++r) scale = std::max(scale, std::abs(tab.rhs(r)));
    if (infeasibility > 1e-9 * scale) {
      sol.status = Status::Infeasible;
      return sol;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basis()[r] < first_artificial) continue;
      for (std::size_t j = 0; j < first_artificial; ++j) {
        if (std::abs(tab.at(r, j)) > 1e-9) {
          tab.pivot(r, j);
          break;
        }
      }
    }
  }

  std::vector<double> costs(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) costs[j] = problem.objective[j];
  tab.price(costs);
  // Artificials may not re-enter; redundant rows keep theirs at level zero.
  sol.status = tab.optimize(first_artificial, options, iterations);
  if (sol.status != Status::Optimal) return sol;

  sol.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (tab.basis()[r] < n) sol.x[tab.basis()[r]] = std::max(0.0, tab.rhs(r));
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += problem.objective[j] * sol.x[j];

  // Duals from B^T y = c_B on the normalized rows, then undo the row signs.
  if (m > 0) {
    Eigen::MatrixXd basis_matrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    Eigen::VectorXd cb(static_cast<Eigen::Index>(m));
    std::size_t slack_col = n;
    std::size_t art_col = first_artificial;
    // Column j of the normalized constraint matrix.
    std::vector<std::vector<double>> extra(cols - n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      if (sense[i] == Sense::LessEqual) {
        extra[slack_col++ - n][i] = 1.0;
      } else {
        if (sense[i] == Sense::GreaterEqual) extra[slack_col++ - n][i] = -1.0;
        extra[art_col++ - n][i] = 1.0;
      }
    }
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t j = tab.basis()[r];
      for (std::size_t i = 0; i < m; ++i) {
        basis_matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) =
            j < n ? sign[i] * problem.rows[i].coefficients[j] : extra[j - n][i];
      }
      cb[static_cast<Eigen::Index>(r)] = costs[j];
    }
    const Eigen::VectorXd y = basis_matrix.transpose().partialPivLu().solve(cb);
    sol.duals.resize(m);
    for (std::size_t i = 0; i < m; ++i) sol.duals[i] = sign[i] * y[static_cast<Eigen::Index>(i)];
  }
  return sol;
}

}  // namespace tvent::lp
