#include "tvent/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tvent/error.hpp"
#include "tvent/parallel.hpp"

namespace tvent {

void ModelConfig::validate() const {
  if (regimes < 1) throw DomainError("need at least one regime");
  if (!(switch_budget >= 0.0)) throw DomainError("switch budget must be non-negative");
  if (moment_order < 1 || moment_order > kMaxMomentOrder)
    throw DomainError("moment order must be between 1 and " +
                      std::to_string(kMaxMomentOrder));
  if (anneal_restarts < 1) throw DomainError("need at least one annealing restart");
  if (quad_order < 2) throw DomainError("quadrature order too small");
  if (!l1_bounds.empty() && l1_bounds.size() != 1 && l1_bounds.size() != regimes)
    throw DomainError("l1 bounds must be empty, a single value, or one per regime");
  for (double c : l1_bounds)
    if (!(c >= 0.0)) throw DomainError("l1 bounds must be non-negative");
  if (!(tol_outer > 0.0)) throw DomainError("outer tolerance must be positive");
  if (!(min_regime_weight >= 0.0)) throw DomainError("minimum regime weight must be non-negative");
}

double ModelConfig::l1_bound(std::size_t k) const {
  if (l1_bounds.empty()) return std::numeric_limits<double>::infinity();
  if (l1_bounds.size() == 1) return l1_bounds.front();
  return l1_bounds.at(k);
}

LambdaVector compose_lambda(std::span<const double> weights,
                            const std::vector<LambdaVector>& lambdas) {
  if (weights.size() != lambdas.size() || lambdas.empty())
    throw DomainError("need one weight per regime");
  const std::size_t m = lambdas.front().order();
  std::vector<double> out(m, 0.0);
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (lambdas[k].order() != m) throw DomainError("moment order mismatch");
    for (std::size_t j = 0; j < m; ++j) out[j] += weights[k] * lambdas[k][j];
  }
  return LambdaVector(std::move(out));
}

double total_loglik(const FeatureMatrix& features, const AffiliationField& gamma,
                    const std::vector<LambdaVector>& lambdas,
                    const QuadratureRule& quad) {
  double total = 0.0;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const auto w = gamma.flat_slice(k);
    total += weighted_loglik(lambdas[k], features, w, quad);
  }
  return total;
}

AffiliationField random_initial_affiliation(std::size_t regimes, std::size_t dims,
                                            std::size_t length, double budget,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> labels(dims, std::vector<int>(length));
  for (std::size_t t = 0; t < length; ++t)
    for (std::size_t i = 0; i < dims; ++i)
      labels[i][t] = static_cast<int>(rng() % regimes);

  const auto total_switches = static_cast<std::size_t>(std::floor(budget));
  for (std::size_t i = 0; i < dims; ++i) {
    const std::size_t switches =
        total_switches / dims + (i < total_switches % dims ? 1 : 0);
    const std::size_t blocks = std::min(switches + 1, length);
    std::vector<std::size_t> votes(regimes);
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t begin = b * length / blocks;
      const std::size_t end = (b + 1) * length / blocks;
      std::fill(votes.begin(), votes.end(), 0);
      for (std::size_t t = begin; t < end; ++t) ++votes[static_cast<std::size_t>(labels[i][t])];
      const auto winner = static_cast<int>(
          std::max_element(votes.begin(), votes.end()) - votes.begin());
      std::fill(labels[i].begin() + static_cast<std::ptrdiff_t>(begin),
                labels[i].begin() + static_cast<std::ptrdiff_t>(end), winner);
    }
  }
  return AffiliationField::from_labels(regimes, labels);
}

FitResult fit(const FeatureMatrix& features, const QuadratureRule& quad,
              const ModelConfig& config, const AffiliationField& initial,
              const std::vector<LambdaVector>* initial_lambdas) {
  config.validate();
  const std::size_t K = config.regimes;
  const std::size_t m = features.order();
  if (m != config.moment_order) throw DomainError("feature order does not match config");
  if (initial.regimes() != K || initial.dims() != features.cols() ||
      initial.length() != features.rows())
    throw DomainError("initial affiliation field has the wrong shape");

  FitResult result;
  result.seed = config.seed;
  result.gamma = initial;
  if (initial_lambdas) {
    if (initial_lambdas->size() != K) throw DomainError("need one initial lambda per regime");
    result.lambdas = *initial_lambdas;
  } else {
    result.lambdas.assign(K, LambdaVector::zeros(m));
  }
  result.log_z.resize(K);
  for (std::size_t k = 0; k < K; ++k) result.log_z[k] = log_partition(result.lambdas[k], quad);

  LambdaFitOptions lopts;
  lopts.tol = config.lambda_tol;
  lopts.max_iter = config.lambda_max_iter;

  const auto occupied = [](double weight) { return weight > 1e-9; };
  double previous = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < config.max_outer_iter; ++iter) {
    result.iterations = iter + 1;
    std::vector<MomentTarget> targets;
    for (std::size_t k = 0; k < K; ++k) {
      targets.push_back(weighted_moments(features, result.gamma.flat_slice(k)));
      const double w = targets.back().total_weight;
      if (occupied(w) && w < config.min_regime_weight) result.ill_posed = true;
    }
    if (result.ill_posed) break;
    for (std::size_t k = 0; k < K; ++k) {
      const MomentTarget& target = targets[k];
      if (!occupied(target.total_weight)) continue;  // empty regime: frozen
      lopts.l1_bound = config.l1_bound(k);
      const LambdaFit lf = fit_lambda(target, m, quad, lopts, &result.lambdas[k]);
      result.lambdas[k] = lf.lambda;
      result.log_z[k] = lf.log_z;
    }

    const ScoreTensor scores = build_scores(result.lambdas, result.log_z, features);
    double objective = lp_objective(scores, result.gamma);
    GammaSolution gs = solve_gamma(scores, config.switch_budget, &result.gamma);
    if (gs.objective >= objective) {
      result.gamma = std::move(gs.gamma);
      objective = gs.objective;
    }
    result.trace.push_back(objective);
    if (std::abs(objective - previous) < config.tol_outer * (1.0 + std::abs(objective))) {
      result.converged = true;
      break;
    }
    previous = objective;
  }
  result.loglik = result.trace.empty()
                      ? total_loglik(features, result.gamma, result.lambdas, quad)
                      : result.trace.back();

  std::size_t used = 0;
  for (std::size_t k = 0; k < K; ++k) {
    double mass = 0.0;
    for (double v : result.gamma.flat_slice(k)) mass += v;
    if (occupied(mass)) ++used;
  }
  result.degenerate = K > 1 && used <= 1;
  result.param_count = param_count(result, config.sparsity_eps);
  result.bic = bic(result.loglik, result.param_count, features.points());
  return result;
}

FitResult fit(const Panel& scaled, const ModelConfig& config) {
  config.validate();
  const FeatureMatrix features(scaled, config.moment_order);
  const QuadratureRule quad(config.quad_order);
  const auto initial = random_initial_affiliation(
      config.regimes, scaled.cols(), scaled.rows(), config.switch_budget, config.seed);
  return fit(features, quad, config, initial);
}

FitResult anneal(const FeatureMatrix& features, const QuadratureRule& quad,
                 const ModelConfig& config, std::size_t jobs) {
  config.validate();
  std::vector<FitResult> runs(config.anneal_restarts);
  parallel_for(runs.size(), jobs, [&](std::size_t r) {
    ModelConfig c = config;
    c.seed = config.seed + r;
    const auto initial = random_initial_affiliation(c.regimes, features.cols(),
                                                    features.rows(), c.switch_budget, c.seed);
    runs[r] = fit(features, quad, c, initial);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const bool better_posed = runs[best].ill_posed && !runs[r].ill_posed;
    const bool same_posed = runs[best].ill_posed == runs[r].ill_posed;
    if (better_posed || (same_posed && runs[r].loglik > runs[best].loglik)) best = r;
  }
  return std::move(runs[best]);
}

FitResult anneal(const Panel& scaled, const ModelConfig& config, std::size_t jobs) {
  config.validate();
  const FeatureMatrix features(scaled, config.moment_order);
  const QuadratureRule quad(config.quad_order);
  return anneal(features, quad, config, jobs);
}

std::size_t segment_count(const AffiliationField& gamma) {
  std::size_t segments = 0;
  for (std::size_t i = 0; i < gamma.dims(); ++i) {
    const auto labels = gamma.hard_labels(i);
    if (labels.empty()) continue;
    ++segments;
    for (std::size_t t = 1; t < labels.size(); ++t)
      if (labels[t] != labels[t - 1]) ++segments;
  }
  return segments;
}

std::size_t param_count(const FitResult& fit, double eps) {
  std::size_t p = 0;
  for (const auto& lam : fit.lambdas) p += sparsify(lam, eps).active_count;
  const std::size_t K = fit.regimes();
  if (K > 1) p += (K - 1) * segment_count(fit.gamma);
  return p;
}

double bic(double loglik, std::size_t params, std::size_t sample_size) {
  return -2.0 * loglik + static_cast<double>(params) * std::log(static_cast<double>(sample_size));
}

double bic(const FitResult& fit, std::size_t dims, std::size_t length, double eps) {
  return bic(fit.loglik, param_count(fit, eps), dims * length);
}

std::vector<double> schwarz_weights(std::span<const double> bics) {
  if (bics.empty()) throw DomainError("need at least one BIC value");
  double lo = bics.front();
  for (double b : bics) {
    if (!std::isfinite(b)) throw DomainError("BIC values must be finite");
    lo = std::min(lo, b);
  }
  std::vector<double> w(bics.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < bics.size(); ++i) {
    w[i] = std::exp(-0.5 * (bics[i] - lo));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

namespace {

GridCell make_cell(const FitResult& f, double budget, std::vector<double> bounds) {
  GridCell c;
  c.regimes = f.regimes();
  c.switch_budget = budget;
  c.l1_bounds = std::move(bounds);
  c.loglik = f.loglik;
  c.bic = f.bic;
  c.param_count = f.param_count;
  c.converged = f.converged;
  c.ill_posed = f.ill_posed;
  return c;
}

bool all_ill_posed(const std::vector<GridCell>& cells) {
  return std::all_of(cells.begin(), cells.end(), [](const GridCell& c) { return c.ill_posed; });
}

std::size_t argmin_bic(const std::vector<GridCell>& cells) {
  const bool any = all_ill_posed(cells);
  std::size_t best = cells.size();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].ill_posed && !any) continue;
    if (best == cells.size() || cells[i].bic < cells[best].bic) best = i;
  }
  return best;
}

void fill_weights(std::vector<GridCell>& cells) {
  const bool any = all_ill_posed(cells);
  std::vector<double> b;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i].schwarz_weight = 0.0;
    if (cells[i].ill_posed && !any) continue;
    b.push_back(cells[i].bic);
    idx.push_back(i);
  }
  const auto w = schwarz_weights(b);
  for (std::size_t j = 0; j < idx.size(); ++j) cells[idx[j]].schwarz_weight = w[j];
}

}  // namespace

SelectionReport grid_search(const Panel& scaled, const ModelConfig& base,
                            const GridSearchOptions& options) {
  if (options.regimes.empty() || options.switch_budgets.empty())
    throw DomainError("grid must be non-empty");
  base.validate();
  const FeatureMatrix features(scaled, base.moment_order);
  const QuadratureRule quad(base.quad_order);

  struct Cell {
    std::size_t regimes;
    double budget;
  };
  std::vector<Cell> cells;
  for (std::size_t k : options.regimes)
    for (double c : options.switch_budgets) cells.push_back({k, c});

  std::vector<FitResult> fits(cells.size());
  parallel_for(cells.size(), options.jobs, [&](std::size_t idx) {
    ModelConfig c = base;
    c.regimes = cells[idx].regimes;
    c.switch_budget = cells[idx].budget;
    c.l1_bounds.clear();
    fits[idx] = anneal(features, quad, c, 1);
  });

  SelectionReport report;
  for (std::size_t idx = 0; idx < cells.size(); ++idx)
    report.stage1.push_back(make_cell(fits[idx], cells[idx].budget, {}));
  fill_weights(report.stage1);
  report.stage1_choice = argmin_bic(report.stage1);

  const FitResult& winner = fits[report.stage1_choice];
  std::vector<FitResult> stage2_fits;
  stage2_fits.push_back(winner);
  report.stage2.push_back(report.stage1[report.stage1_choice]);

  if (options.stage2 && options.stage2_points > 0) {
    const std::size_t points = options.stage2_points;
    std::vector<double> scales(points);
    for (std::size_t s = 0; s < points; ++s) {
      const double f = points == 1 ? 0.0 : static_cast<double>(s) / static_cast<double>(points - 1);
      scales[s] = options.stage2_low * std::pow(options.stage2_high / options.stage2_low, f);
    }
    std::vector<FitResult> sweep(points);
    parallel_for(points, options.jobs, [&](std::size_t s) {
      ModelConfig c = base;
      c.regimes = winner.regimes();
      c.switch_budget = cells[report.stage1_choice].budget;
      c.seed = winner.seed;
      c.l1_bounds.resize(c.regimes);
      for (std::size_t k = 0; k < c.regimes; ++k)
        c.l1_bounds[k] = scales[s] * winner.lambdas[k].l1_norm();
      sweep[s] = fit(features, quad, c, winner.gamma, &winner.lambdas);
    });
    for (std::size_t s = 0; s < points; ++s) {
      std::vector<double> bounds;
      for (std::size_t k = 0; k < winner.regimes(); ++k)
        bounds.push_back(scales[s] * winner.lambdas[k].l1_norm());
      report.stage2.push_back(make_cell(sweep[s], cells[report.stage1_choice].budget, bounds));
      stage2_fits.push_back(std::move(sweep[s]));
    }
  }
  fill_weights(report.stage2);
  report.stage2_choice = argmin_bic(report.stage2);
  report.best = std::move(stage2_fits[report.stage2_choice]);
  for (const auto& lam : report.best.lambdas)
    report.k_star.push_back(sparsify(lam, base.sparsity_eps).active_count);
  return report;
}

}  // namespace tvent
