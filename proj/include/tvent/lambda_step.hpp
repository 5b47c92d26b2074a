#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "tvent/maxent_density.hpp"
#include "tvent/panel.hpp"
#include "tvent/quadrature.hpp"

namespace tvent {

/// Powers x^1..x^m of every observation of a scaled panel.
///
/// Points are flattened time-major: point p = t * n + i.
class FeatureMatrix {
 public:
  /// Throws DomainError if any entry lies outside [-1, 1] or m is out of range.
  FeatureMatrix(const Panel& scaled, std::size_t m);

  std::size_t points() const noexcept { return rows_ * cols_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t order() const noexcept { return order_; }

  std::span<const double> powers(std::size_t point) const noexcept {
    return {powers_.data() + point * order_, order_};
  }
  double value(std::size_t point) const noexcept { return powers_[point * order_]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::size_t order_;
  std::vector<double> powers_;
};

/// Non-negative weights w_p over the flattened points of a FeatureMatrix
/// (one regime's affiliations).
using WeightSlice = std::span<const double>;

/// Sufficient statistics of a weighted regime: total mass and the weighted
/// sample moments mu_j = sum_p w_p x_p^j / W.
struct MomentTarget {
  double total_weight = 0.0;
  std::vector<double> mean;
};

MomentTarget weighted_moments(const FeatureMatrix& features, WeightSlice w);

/// -sum_p w_p (sum_j lambda_j x_p^j + ln Z(lambda))
double weighted_loglik(const LambdaVector& lambda, const FeatureMatrix& features,
                       WeightSlice w, const QuadratureRule& quad);
double weighted_loglik(const LambdaVector& lambda, const MomentTarget& target,
                       const QuadratureRule& quad);

/// Component j: W (E_lambda[X^j] - mu_j).
std::vector<double> loglik_gradient(const LambdaVector& lambda,
                                    const FeatureMatrix& features, WeightSlice w,
                                    const QuadratureRule& quad);
std::vector<double> loglik_gradient(const LambdaVector& lambda,
                                    const MomentTarget& target,
                                    const QuadratureRule& quad);

struct LambdaFitOptions {
  double l1_bound = std::numeric_limits<double>::infinity();
  /// Stationarity tolerance on the W-scaled (projected) gradient.
  double tol = 1e-7;
  std::size_t max_iter = 5000;
};

struct LambdaFit {
  LambdaVector lambda;
  double log_z = 0.0;
  double loglik = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Weighted log-likelihood after every accepted step (starts at the
  /// projected initial point).
  std::vector<double> trace;
};

/// Maximizes the weighted log-likelihood over ||lambda||_1 <= l1_bound.
///
/// Projected Newton: the search direction maximizes the local quadratic model
/// over the l1 ball, followed by a backtracking line search on the feasible
/// segment, so every accepted step increases the objective. Returns the best
/// iterate with converged == false after max_iter. Throws EmptyRegime when the
/// total weight is zero.
LambdaFit fit_lambda(const MomentTarget& target, std::size_t m,
                     const QuadratureRule& quad, const LambdaFitOptions& options = {},
                     const LambdaVector* warm_start = nullptr);
LambdaFit fit_lambda(const FeatureMatrix& features, WeightSlice w,
                     const QuadratureRule& quad, const LambdaFitOptions& options = {},
                     const LambdaVector* warm_start = nullptr);

struct Sparsified {
  LambdaVector lambda;
  std::size_t active_count = 0;
};

/// Zeroes every |lambda_j| < eps; active_count is the number of nonzeros.
Sparsified sparsify(const LambdaVector& lambda, double eps = 1e-5);

/// Euclidean projection onto {v : ||v||_1 <= radius}.
std::vector<double> project_l1_ball(std::span<const double> v, double radius);

}  // namespace tvent
