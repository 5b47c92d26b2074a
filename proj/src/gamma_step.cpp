#include "tvent/gamma_step.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tvent/error.hpp"
#include "tvent/simplex.hpp"

namespace tvent {

std::vector<double> RegimeArray::flat_slice(std::size_t k) const {
  std::vector<double> out(dims_ * length_);
  for (std::size_t i = 0; i < dims_; ++i)
    for (std::size_t t = 0; t < length_; ++t) out[t * dims_ + i] = (*this)(k, t, i);
  return out;
}

AffiliationField AffiliationField::constant(std::size_t regimes, std::size_t dims,
                                            std::size_t length, std::size_t k) {
  AffiliationField g(regimes, dims, length, 0.0);
  for (std::size_t i = 0; i < dims; ++i)
    for (std::size_t t = 0; t < length; ++t) g(k, t, i) = 1.0;
  return g;
}

AffiliationField AffiliationField::from_labels(
    std::size_t regimes, const std::vector<std::vector<int>>& labels) {
  if (labels.empty()) throw DomainError("no label series");
  const std::size_t length = labels.front().size();
  AffiliationField g(regimes, labels.size(), length, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].size() != length) throw DomainError("ragged label series");
    for (std::size_t t = 0; t < length; ++t) {
      const int k = labels[i][t];
      if (k < 0 || static_cast<std::size_t>(k) >= regimes)
        throw DomainError("label out of range");
      g(static_cast<std::size_t>(k), t, i) = 1.0;
    }
  }
  return g;
}

std::vector<int> AffiliationField::hard_labels(std::size_t i) const {
  std::vector<int> out(length_, 0);
  for (std::size_t t = 0; t < length_; ++t) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < regimes_; ++k)
      if ((*this)(k, t, i) > (*this)(best, t, i)) best = k;
    out[t] = static_cast<int>(best);
  }
  return out;
}

std::vector<std::vector<int>> AffiliationField::hard_labels() const {
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < dims_; ++i) out.push_back(hard_labels(i));
  return out;
}

ScoreTensor build_scores(const std::vector<LambdaVector>& lambdas,
                         const std::vector<double>& log_z,
                         const FeatureMatrix& features) {
  if (lambdas.size() != log_z.size() || lambdas.empty())
    throw DomainError("need one log-partition value per regime");
  const std::size_t n = features.cols();
  const std::size_t T = features.rows();
  ScoreTensor scores(lambdas.size(), n, T);
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const auto& lam = lambdas[k];
    if (lam.order() != features.order()) throw DomainError("moment order mismatch");
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto pw = features.powers(t * n + i);
        double s = 0.0;
        for (std::size_t j = 0; j < pw.size(); ++j) s += lam[j] * pw[j];
        scores(k, t, i) = -(s + log_z[k]);
      }
    }
  }
  return scores;
}

double tv_norm(const AffiliationField& gamma, std::size_t k) {
  double total = 0.0;
  for (std::size_t i = 0; i < gamma.dims(); ++i) {
    const auto s = gamma.series(k, i);
    for (std::size_t t = 1; t < s.size(); ++t) total += std::abs(s[t] - s[t - 1]);
  }
  return total;
}

double lp_objective(const ScoreTensor& scores, const AffiliationField& gamma) {
  double total = 0.0;
  const auto& a = scores.data();
  const auto& g = gamma.data();
  for (std::size_t p = 0; p < a.size(); ++p)
    if (g[p] != 0.0) total += g[p] * a[p];
  return total;
}

namespace {

struct PathColumn {
  std::size_t dim = 0;
  std::vector<std::uint8_t> labels;
  double value = 0.0;              // perturbed score sum
  std::vector<double> switches;    // per-regime TV contribution
};

PathColumn make_column(std::size_t dim, std::vector<std::uint8_t> labels,
                       const RegimeArray& scores, std::size_t regimes) {
  PathColumn c;
  c.dim = dim;
  c.switches.assign(regimes, 0.0);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    c.value += scores(labels[t], t, dim);
    if (t > 0 && labels[t] != labels[t - 1]) {
      c.switches[labels[t]] += 1.0;
      c.switches[labels[t - 1]] += 1.0;
    }
  }
  c.labels = std::move(labels);
  return c;
}

/// Best path for one dimension under switch costs mu_j + mu_l; returns its
/// penalized value. Ties resolve to the lowest regime index.
double price_path(const RegimeArray& scores, std::size_t dim,
                  const std::vector<double>& mu, std::vector<std::uint8_t>& path) {
  const std::size_t K = scores.regimes();
  const std::size_t T = scores.length();
  std::vector<double> value(K), next(K);
  std::vector<std::uint8_t> back(T * K, 0);
  for (std::size_t k = 0; k < K; ++k) value[k] = scores(k, 0, dim);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t l = 0; l < K; ++l) {
      double best = -std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t j = 0; j < K; ++j) {
        const double cand = j == l ? value[j] : value[j] - mu[j] - mu[l];
        if (cand > best) {
          best = cand;
          arg = j;
        }
      }
      next[l] = best + scores(l, t, dim);
      back[t * K + l] = static_cast<std::uint8_t>(arg);
    }
    std::swap(value, next);
  }
  std::size_t last = 0;
  for (std::size_t k = 1; k < K; ++k)
    if (value[k] > value[last]) last = k;
  path.assign(T, 0);
  path[T - 1] = static_cast<std::uint8_t>(last);
  for (std::size_t t = T - 1; t > 0; --t) path[t - 1] = back[t * K + path[t]];
  return value[last];
}

}  // namespace

GammaSolution solve_gamma(const ScoreTensor& scores, double budget,
                          const AffiliationField* previous,
                          const GammaSolveOptions& options) {
  const std::size_t K = scores.regimes();
  const std::size_t n = scores.dims();
  const std::size_t T = scores.length();
  if (K < 1) throw DomainError("need at least one regime");
  if (K > 255) throw DomainError("too many regimes");
  if (!(budget >= 0.0)) throw DomainError("switch budget must be non-negative");
  for (double v : scores.data())
    if (!std::isfinite(v)) throw DomainError("scores must be finite");

  GammaSolution out;
  out.budget_duals.assign(K, 0.0);
  if (K == 1) {
    out.gamma = AffiliationField::constant(1, n, T, 0);
    out.objective = lp_objective(scores, out.gamma);
    out.optimal = true;
    return out;
  }

  RegimeArray perturbed = scores;
  if (previous) {
    if (previous->regimes() != K || previous->dims() != n || previous->length() != T)
      throw DomainError("previous affiliation field has the wrong shape");
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < T; ++t)
          perturbed(k, t, i) += options.tie_preference * (*previous)(k, t, i);
  }

  std::vector<PathColumn> columns;
  std::vector<std::set<std::vector<std::uint8_t>>> seen(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<std::uint8_t> labels(T, static_cast<std::uint8_t>(k));
      seen[i].insert(labels);
      columns.push_back(make_column(i, std::move(labels), perturbed, K));
    }
  }

  lp::Solution master;
  std::vector<double> mu(K, 0.0);
  std::vector<std::uint8_t> path;
  for (std::size_t round = 0; round < options.max_rounds; ++round) {
    out.rounds = round + 1;
    lp::Problem problem;
    problem.objective.resize(columns.size());
    problem.rows.resize(n + K);
    for (std::size_t r = 0; r < n + K; ++r) {
      problem.rows[r].coefficients.assign(columns.size(), 0.0);
      problem.rows[r].sense = r < n ? lp::Sense::Equal : lp::Sense::LessEqual;
      problem.rows[r].rhs = r < n ? 1.0 : budget;
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
      problem.objective[c] = columns[c].value;
      problem.rows[columns[c].dim].coefficients[c] = 1.0;
      for (std::size_t k = 0; k < K; ++k)
        problem.rows[n + k].coefficients[c] = columns[c].switches[k];
    }
    master = lp::solve(problem);
    if (master.status != lp::Status::Optimal)
      throw SolverError("master problem of the affiliation LP did not solve");

    for (std::size_t k = 0; k < K; ++k) mu[k] = std::max(0.0, master.duals[n + k]);

    bool added = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double best = price_path(perturbed, i, mu, path);
      const double pi = master.duals[i];
      if (best - pi > options.tolerance * (1.0 + std::abs(pi)) &&
          seen[i].insert(path).second) {
        columns.push_back(make_column(i, path, perturbed, K));
        added = true;
      }
    }
    if (!added) {
      out.optimal = true;
      break;
    }
  }

  out.gamma = AffiliationField(K, n, T, 0.0);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const double w = master.x[c];
    if (w <= 0.0) continue;
    const auto& col = columns[c];
    for (std::size_t t = 0; t < T; ++t) out.gamma(col.labels[t], t, col.dim) += w;
  }
  // Renormalize each point onto the simplex against rounding in the master.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      double s = 0.0;
      for (std::size_t k = 0; k < K; ++k) s += out.gamma(k, t, i);
      for (std::size_t k = 0; k < K; ++k) out.gamma(k, t, i) /= s;
    }
  }
  out.budget_duals = mu;
  out.objective = lp_objective(scores, out.gamma);
  return out;
}

}  // namespace tvent
