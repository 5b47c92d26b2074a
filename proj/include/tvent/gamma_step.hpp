#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tvent/lambda_step.hpp"
#include "tvent/maxent_density.hpp"

namespace tvent {

/// K x n x T array indexed (regime k, time t, dimension i); each (k, i)
/// series is contiguous in t.
class RegimeArray {
 public:
  RegimeArray() = default;
  RegimeArray(std::size_t regimes, std::size_t dims, std::size_t length,
              double fill = 0.0)
      : regimes_(regimes), dims_(dims), length_(length),
        data_(regimes * dims * length, fill) {}

  std::size_t regimes() const noexcept { return regimes_; }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t length() const noexcept { return length_; }

  double operator()(std::size_t k, std::size_t t, std::size_t i) const noexcept {
    return data_[(k * dims_ + i) * length_ + t];
  }
  double& operator()(std::size_t k, std::size_t t, std::size_t i) noexcept {
    return data_[(k * dims_ + i) * length_ + t];
  }
  std::span<const double> series(std::size_t k, std::size_t i) const noexcept {
    return {data_.data() + (k * dims_ + i) * length_, length_};
  }
  std::span<double> series(std::size_t k, std::size_t i) noexcept {
    return {data_.data() + (k * dims_ + i) * length_, length_};
  }
  const std::vector<double>& data() const noexcept { return data_; }

  /// Regime k's values over flattened points p = t * n + i.
  std::vector<double> flat_slice(std::size_t k) const;

  friend bool operator==(const RegimeArray&, const RegimeArray&) = default;

 protected:
  std::size_t regimes_ = 0;
  std::size_t dims_ = 0;
  std::size_t length_ = 0;
  std::vector<double> data_;
};

/// a(k, t, i) = ln f_k(x_{t,i}), the per-point log-density of regime k.
class ScoreTensor : public RegimeArray {
 public:
  using RegimeArray::RegimeArray;
};

/// Convex regime weights gamma(k, t, i).
class AffiliationField : public RegimeArray {
 public:
  using RegimeArray::RegimeArray;

  /// All mass on regime k.
  static AffiliationField constant(std::size_t regimes, std::size_t dims,
                                   std::size_t length, std::size_t k);
  /// One-hot field from hard labels, labels[i][t] in [0, regimes).
  static AffiliationField from_labels(std::size_t regimes,
                                      const std::vector<std::vector<int>>& labels);

  /// argmax_k gamma(k, t, i) per t, ties to the lowest k.
  std::vector<int> hard_labels(std::size_t i) const;
  std::vector<std::vector<int>> hard_labels() const;
};

ScoreTensor build_scores(const std::vector<LambdaVector>& lambdas,
                         const std::vector<double>& log_z,
                         const FeatureMatrix& features);

/// sum_i sum_t |gamma(k, t+1, i) - gamma(k, t, i)|
double tv_norm(const AffiliationField& gamma, std::size_t k);

/// sum over (k, t, i) of gamma * a.
double lp_objective(const ScoreTensor& scores, const AffiliationField& gamma);

struct GammaSolveOptions {
  /// Weight of the linear preference toward the previous field on ties.
  double tie_preference = 1e-9;
  std::size_t max_rounds = 5000;
  double tolerance = 1e-10;
};

struct GammaSolution {
  AffiliationField gamma;
  /// lp_objective(scores, gamma), without the tie preference term.
  double objective = 0.0;
  /// Shadow price of each regime's switch budget.
  std::vector<double> budget_duals;
  std::size_t rounds = 0;
  bool optimal = false;
};

/// Maximizes sum gamma * a over convex gamma with tv_norm(gamma, k) <= budget
/// for every k.
///
/// Solved exactly by Dantzig-Wolfe column generation: each dimension's
/// feasible set is represented by convex combinations of hard regime paths,
/// the master LP carries the convexity rows and the K budget rows, and new
/// paths are priced by a Viterbi pass whose switch j -> l costs mu_j + mu_l.
/// On a chain the path relaxation is tight under this star-shaped switching
/// cost, so the master optimum equals the LP optimum. Throws SolverError if
/// the master problem fails.
GammaSolution solve_gamma(const ScoreTensor& scores, double budget,
                          const AffiliationField* previous = nullptr,
                          const GammaSolveOptions& options = {});

}  // namespace tvent
