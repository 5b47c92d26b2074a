#pragma once

#include <cstddef>
#include <vector>

#include "tvent/estimator.hpp"
#include "tvent/panel.hpp"
#include "tvent/quadrature.hpp"

namespace tvent {

/// argmax_k [ln f_k(x) - penalty * (k != k_prev)], ties to k_prev and then
/// to the lowest index. x is a scaled value and is clipped to [-1, 1].
std::size_t assign_regime_online(const FitResult& fit, double x_scaled,
                                 std::size_t k_prev, double switch_penalty = 0.0);

/// Causal regime tracker: running scores
///   S_k(t) = ln f_k(x_t) + max(S_k(t-1), max_j S_j(t-1) - penalty),
/// assigned regime argmax_k S_k(t) (ties to the previous assignment, then the
/// lowest index). With penalty 0 this is per-point maximum likelihood.
class OnlineRegimeTracker {
 public:
  OnlineRegimeTracker(const FitResult& fit, std::size_t initial_regime,
                      double switch_penalty = 0.0);

  /// Consumes one scaled observation; returns the regime assigned after it.
  std::size_t update(double x_scaled);
  std::size_t current() const noexcept { return current_; }

 private:
  const FitResult* fit_;
  double penalty_;
  std::size_t current_;
  std::vector<double> scores_;
};

/// Value-at-Risk at coverage alpha (e.g. 0.95) in return units for regime k
/// of dimension i: minus the inverse-scaled (1 - alpha) quantile.
double var_forecast(const FitResult& fit, std::size_t k, double alpha,
                    const ScalingMap& scaling, std::size_t i,
                    const QuadratureRule& quad);

struct KupiecResult {
  double lr = 0.0;
  double p_value = 1.0;
};

/// Unconditional coverage likelihood ratio for x violations in T_out trials
/// at target rate p, with 0 ln 0 = 0; p-value from the chi-square(1) tail.
KupiecResult kupiec_test(std::size_t violations, std::size_t trials, double p_target);

/// Upper tail of the chi-square distribution with one degree of freedom.
double chi2_1_sf(double x);

struct VarCoverage {
  std::size_t dim = 0;
  double alpha = 0.0;
  std::size_t violations = 0;
  std::size_t trials = 0;
  double coverage = 0.0;  // violations / trials
  double lr = 0.0;
  double p_value = 1.0;
};

struct VarStep {
  std::size_t t = 0;
  std::size_t dim = 0;
  std::size_t regime = 0;  // regime used for the forecast of x_t
  double value = 0.0;      // realized return
  std::vector<double> var; // one per alpha
  std::vector<bool> violation;
};

struct VarBacktestResult {
  std::vector<VarCoverage> coverage;  // ordered by (dim, alpha)
  std::vector<VarStep> steps;         // ordered by (t, dim)
};

struct BacktestOptions {
  std::vector<double> alphas{0.95, 0.99};
  double switch_penalty = 0.0;
  bool keep_steps = false;
};

/// Walk-forward one-step-ahead VaR with fixed in-sample parameters. The
/// regime used at t is the one assigned after x_{t-1}; at t = 0 it is the
/// in-sample hard regime of the last observation. Violation iff x_t < -VaR.
VarBacktestResult backtest(const FitResult& fit, const ScalingMap& scaling,
                           const Panel& out_of_sample, const QuadratureRule& quad,
                           const BacktestOptions& options = {});

}  // namespace tvent
