#include "tvent/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tvent/error.hpp"

namespace tvent {

namespace {

double regime_log_density(const FitResult& fit, std::size_t k, double x) {
  return -(fit.lambdas[k].polynomial(x) + fit.log_z[k]);
}

// argmax with ties to `preferred`, then the lowest index.
std::size_t argmax_preferring(const std::vector<double>& v, std::size_t preferred) {
  std::size_t best = preferred < v.size() ? preferred : 0;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (v[k] > v[best]) best = k;
  return best;
}

}  // namespace

std::size_t assign_regime_online(const FitResult& fit, double x_scaled,
                                 std::size_t k_prev, double switch_penalty) {
  const std::size_t K = fit.regimes();
  if (K == 0) throw DomainError("fit has no regimes");
  const double x = std::clamp(x_scaled, -1.0, 1.0);
  std::vector<double> score(K);
  for (std::size_t k = 0; k < K; ++k)
    score[k] = regime_log_density(fit, k, x) - (k == k_prev ? 0.0 : switch_penalty);
  return argmax_preferring(score, k_prev);
}

OnlineRegimeTracker::OnlineRegimeTracker(const FitResult& fit, std::size_t initial_regime,
                                         double switch_penalty)
    : fit_(&fit), penalty_(switch_penalty), current_(initial_regime) {
  if (fit.regimes() == 0) throw DomainError("fit has no regimes");
  if (initial_regime >= fit.regimes()) throw DomainError("initial regime out of range");
  if (!(switch_penalty >= 0.0)) throw DomainError("switch penalty must be non-negative");
  scores_.assign(fit.regimes(), -penalty_);
  scores_[initial_regime] = 0.0;
}

std::size_t OnlineRegimeTracker::update(double x_scaled) {
  const double x = std::clamp(x_scaled, -1.0, 1.0);
  const double top = *std::max_element(scores_.begin(), scores_.end());
  std::vector<double> next(scores_.size());
  for (std::size_t k = 0; k < scores_.size(); ++k)
    next[k] = regime_log_density(*fit_, k, x) + std::max(scores_[k], top - penalty_);
  // Shift so the scores stay bounded over long walks.
  const double shift = *std::max_element(next.begin(), next.end());
  for (double& s : next) s -= shift;
  scores_ = std::move(next);
  current_ = argmax_preferring(scores_, current_);
  return current_;
}

double var_forecast(const FitResult& fit, std::size_t k, double alpha,
                    const ScalingMap& scaling, std::size_t i,
                    const QuadratureRule& quad) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (k >= fit.regimes()) throw DomainError("regime index out of range");
  const MaxEntDistribution dist(fit.lambdas[k], quad);
  return -scaling[i].inverse(dist.quantile(1.0 - alpha));
}

double chi2_1_sf(double x) {
  if (!(x > 0.0)) return 1.0;
  return std::erfc(std::sqrt(0.5 * x));
}

KupiecResult kupiec_test(std::size_t violations, std::size_t trials, double p_target) {
  if (trials == 0) throw DomainError("need at least one trial");
  if (violations > trials) throw DomainError("more violations than trials");
  if (!(p_target > 0.0 && p_target < 1.0)) throw DomainError("target rate must lie in (0, 1)");
  const double x = static_cast<double>(violations);
  const double n = static_cast<double>(trials);
  // Each term is count * ln(observed rate / target rate); 0 ln 0 = 0.
  double lr = 0.0;
  if (violations > 0) lr += x * std::log((x / n) / p_target);
  if (violations < trials) lr += (n - x) * std::log1p(-x / n) - (n - x) * std::log1p(-p_target);
  lr = std::max(0.0, 2.0 * lr);
  return {lr, chi2_1_sf(lr)};
}

VarBacktestResult backtest(const FitResult& fit, const ScalingMap& scaling,
                           const Panel& out_of_sample, const QuadratureRule& quad,
                           const BacktestOptions& options) {
  const std::size_t K = fit.regimes();
  const std::size_t n = out_of_sample.cols();
  const std::size_t T = out_of_sample.rows();
  if (K == 0) throw DomainError("fit has no regimes");
  if (scaling.size() != n) throw DomainError("scaling map does not match the panel");
  if (fit.gamma.dims() != n) throw DomainError("fit dimension does not match the panel");
  if (options.alphas.empty()) throw DomainError("need at least one coverage level");
  const std::size_t A = options.alphas.size();

  // Scaled-domain quantiles per (regime, alpha); mapped per dimension below.
  std::vector<double> q(K * A);
  for (std::size_t k = 0; k < K; ++k) {
    const MaxEntDistribution dist(fit.lambdas[k], quad);
    for (std::size_t a = 0; a < A; ++a) {
      const double alpha = options.alphas[a];
      if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
      q[k * A + a] = dist.quantile(1.0 - alpha);
    }
  }

  std::vector<std::vector<VarStep>> per_dim(n);
  std::vector<std::vector<std::size_t>> counts(n, std::vector<std::size_t>(A, 0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto last = fit.gamma.hard_labels(i);
    OnlineRegimeTracker tracker(fit, static_cast<std::size_t>(last.back()),
                                options.switch_penalty);
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t k = tracker.current();
      const double x = out_of_sample(t, i);
      VarStep step;
      step.t = t;
      step.dim = i;
      step.regime = k;
      step.value = x;
      for (std::size_t a = 0; a < A; ++a) {
        const double var = -scaling[i].inverse(q[k * A + a]);
        const bool hit = x < -var;
        if (hit) ++counts[i][a];
        if (options.keep_steps) {
          step.var.push_back(var);
          step.violation.push_back(hit);
        }
      }
      if (options.keep_steps) per_dim[i].push_back(std::move(step));
      tracker.update(scaling.forward_clipped(i, x));
    }
  }

  VarBacktestResult out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < A; ++a) {
      VarCoverage c;
      c.dim = i;
      c.alpha = options.alphas[a];
      c.violations = counts[i][a];
      c.trials = T;
      c.coverage = static_cast<double>(c.violations) / static_cast<double>(T);
      const auto kr = kupiec_test(c.violations, T, 1.0 - c.alpha);
      c.lr = kr.lr;
      c.p_value = kr.p_value;
      out.coverage.push_back(c);
    }
  }
  if (options.keep_steps) {
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < n; ++i) out.steps.push_back(std::move(per_dim[i][t]));
  }
  return out;
}

}  // namespace tvent
