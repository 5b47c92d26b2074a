#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "tvent/gamma_step.hpp"
#include "tvent/lambda_step.hpp"
#include "tvent/maxent_density.hpp"
#include "tvent/panel.hpp"
#include "tvent/quadrature.hpp"

namespace tvent {

struct ModelConfig {
  std::size_t regimes = 2;        // K
  double switch_budget = 1.0;     // C_gamma
  /// Per-regime l1 bounds C_lambda; empty means +inf for every regime, a
  /// single entry applies to all regimes.
  std::vector<double> l1_bounds;
  std::size_t moment_order = 6;   // m
  std::size_t anneal_restarts = 10;
  std::size_t quad_order = 200;
  double tol_outer = 1e-6;
  std::size_t max_outer_iter = 200;
  std::uint64_t seed = 0;
  double lambda_tol = 1e-7;
  std::size_t lambda_max_iter = 5000;
  double sparsity_eps = 1e-5;
  /// An occupied regime (weight above 1e-9) lighter than this makes the fit
  /// ill-posed: its likelihood is unbounded as the density collapses onto a
  /// few points. 0 disables the check.
  double min_regime_weight = 30.0;

  /// Throws DomainError when an invariant is violated.
  void validate() const;
  double l1_bound(std::size_t k) const;
};

struct FitResult {
  AffiliationField gamma;
  std::vector<LambdaVector> lambdas;
  std::vector<double> log_z;
  /// Total log-likelihood in the scaled domain.
  double loglik = 0.0;
  double bic = 0.0;
  std::size_t param_count = 0;
  /// Outer objective after every full (lambda, gamma) iteration.
  std::vector<double> trace;
  std::size_t iterations = 0;
  bool converged = false;
  /// True when K > 1 but all mass sits in a single regime.
  bool degenerate = false;
  /// True when some occupied regime fell below ModelConfig::min_regime_weight;
  /// the alternation stops at that point.
  bool ill_posed = false;
  /// Seed of the restart that produced this fit.
  std::uint64_t seed = 0;

  std::size_t regimes() const noexcept { return lambdas.size(); }
};

/// sum_k w_k lambda^(k)
LambdaVector compose_lambda(std::span<const double> weights,
                            const std::vector<LambdaVector>& lambdas);

/// Recomputes sum_k sum_{t,i} gamma * ln f_k(x_{t,i}) from scratch.
double total_loglik(const FeatureMatrix& features, const AffiliationField& gamma,
                    const std::vector<LambdaVector>& lambdas,
                    const QuadratureRule& quad);

/// Random one-hot affiliation whose regime path is smoothed to at most
/// floor(budget) switches in total: uniform labels per point, then a
/// majority vote over contiguous blocks in each dimension.
AffiliationField random_initial_affiliation(std::size_t regimes, std::size_t dims,
                                            std::size_t length, double budget,
                                            std::uint64_t seed);

/// Alternates the lambda step (per regime) and the gamma LP from the given
/// initial affiliation until the relative change of the objective drops
/// below tol_outer.
FitResult fit(const FeatureMatrix& features, const QuadratureRule& quad,
              const ModelConfig& config, const AffiliationField& initial,
              const std::vector<LambdaVector>* initial_lambdas = nullptr);

/// fit() from random_initial_affiliation(config.seed).
FitResult fit(const Panel& scaled, const ModelConfig& config);

/// Best of config.anneal_restarts fits by log-likelihood, preferring fits that
/// are not ill-posed; restart r uses seed config.seed + r. Ties go to the
/// lowest r.
FitResult anneal(const FeatureMatrix& features, const QuadratureRule& quad,
                 const ModelConfig& config, std::size_t jobs = 1);
FitResult anneal(const Panel& scaled, const ModelConfig& config, std::size_t jobs = 1);

/// Number of maximal constant segments of the hard regime path, summed over
/// dimensions.
std::size_t segment_count(const AffiliationField& gamma);

/// sum_k nnz(sparsify(lambda_k)) + (K - 1) * segment_count.
std::size_t param_count(const FitResult& fit, double eps = 1e-5);

double bic(double loglik, std::size_t params, std::size_t sample_size);
double bic(const FitResult& fit, std::size_t dims, std::size_t length,
           double eps = 1e-5);

/// exp(-delta_i / 2) / sum_j exp(-delta_j / 2), delta_i = bic_i - min bic.
std::vector<double> schwarz_weights(std::span<const double> bics);

struct GridCell {
  std::size_t regimes = 0;
  double switch_budget = 0.0;
  /// Empty for the unregularized fit.
  std::vector<double> l1_bounds;
  double loglik = 0.0;
  double bic = 0.0;
  std::size_t param_count = 0;
  double schwarz_weight = 0.0;
  bool converged = false;
  /// Ill-posed cells get zero Schwarz weight and are never selected unless
  /// every cell is ill-posed.
  bool ill_posed = false;
};

struct GridSearchOptions {
  std::vector<std::size_t> regimes{1, 2, 3, 4};
  std::vector<double> switch_budgets{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  bool stage2 = true;
  std::size_t stage2_points = 12;
  double stage2_low = 0.05;
  double stage2_high = 1.5;
  std::size_t jobs = 1;
};

struct SelectionReport {
  std::vector<GridCell> stage1;
  std::size_t stage1_choice = 0;
  /// Entry 0 is the unregularized stage-1 winner; the rest sweep C_lambda.
  std::vector<GridCell> stage2;
  std::size_t stage2_choice = 0;
  /// Active coefficients per regime of the selected model.
  std::vector<std::size_t> k_star;
  FitResult best;
};

/// Stage 1 anneals every (K, C_gamma) cell without l1 bounds and keeps the
/// minimum-BIC cell. Stage 2 refits that cell, warm-started from its
/// solution, with C_lambda^(k) = s |lambda*_k|_1 for s on a logarithmic grid
/// [stage2_low, stage2_high], and keeps the minimum BIC including the
/// unregularized endpoint.
SelectionReport grid_search(const Panel& scaled, const ModelConfig& base,
                            const GridSearchOptions& options);

}  // namespace tvent
