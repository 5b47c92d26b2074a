#include "tvent/lambda_step.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

#include "tvent/error.hpp"

namespace tvent {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Objective per unit weight, its gradient and negative Hessian at one point.
struct LocalModel {
  double value = 0.0;  // -(lambda . mu + ln Z)
  double log_z = 0.0;
  Vec grad;            // E[X^j] - mu_j, the ascent direction
  Mat curvature;       // Cov(X^j, X^l), the negated Hessian
};

LocalModel evaluate(const Vec& lambda, const Vec& mu, const QuadratureRule& quad,
                    bool with_curvature) {
  const auto m = static_cast<std::size_t>(lambda.size());
  double mom[2 * kMaxMomentOrder];
  const std::size_t count = with_curvature ? 2 * m : m;
  LocalModel out;
  out.log_z = log_partition_and_moments({lambda.data(), m}, quad, {mom, count});
  out.value = -(lambda.dot(mu) + out.log_z);
  out.grad.resize(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) out.grad[static_cast<Eigen::Index>(j)] = mom[j] - mu[static_cast<Eigen::Index>(j)];
  if (with_curvature) {
    out.curvature.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t l = 0; l < m; ++l)
        out.curvature(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) =
            mom[j + l + 1] - mom[j] * mom[l];
  }
  return out;
}

Vec project(const Vec& v, double radius) {
  if (!std::isfinite(radius)) return v;
  const auto p = project_l1_ball({v.data(), static_cast<std::size_t>(v.size())}, radius);
  return Eigen::Map<const Vec>(p.data(), static_cast<Eigen::Index>(p.size()));
}

/// Unconstrained Newton direction with Jacobi scaling and a tiny ridge.
Vec newton_direction(const Mat& h, const Vec& g) {
  Vec d = h.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  Mat scaled = d.asDiagonal() * h * d.asDiagonal();
  scaled.diagonal().array() += 1e-12;
  Eigen::LDLT<Mat> ldlt(scaled);
  Vec z = ldlt.solve(d.cwiseProduct(g));
  if (!z.allFinite() || ldlt.info() != Eigen::Success) return g;
  return d.cwiseProduct(z);
}

/// max g.(y - x) - 1/2 (y - x)' H (y - x) over ||y||_1 <= radius, by
/// monotone accelerated projected gradient. Returns y.
Vec solve_l1_qp(const Mat& h, const Vec& g, const Vec& x, double radius) {
  const double lip = std::max(h.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  auto model = [&](const Vec& y) {
    const Vec s = y - x;
    return g.dot(s) - 0.5 * s.dot(h * s);
  };
  Vec y = x;
  Vec z = x;
  double best = 0.0;
  double theta = 1.0;
  for (int iter = 0; iter < 3000; ++iter) {
    const Vec grad = g - h * (z - x);
    const Vec trial = project(z + grad / lip, radius);
    const double value = model(trial);
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const Vec prev = y;
    if (value >= best) {
      best = value;
      y = trial;
    }
    z = y + ((theta - 1.0) / theta_next) * (y - prev) +
        (theta / theta_next) * (trial - y);
    theta = theta_next;
    if ((y - prev).lpNorm<Eigen::Infinity>() < 1e-14 && iter > 10 &&
        (trial - y).lpNorm<Eigen::Infinity>() < 1e-14)
      break;
  }
  return y;
}

double stationarity(const Vec& lambda, const Vec& grad, double radius) {
  return (lambda - project(lambda + grad, radius)).lpNorm<Eigen::Infinity>();
}

}  // namespace

FeatureMatrix::FeatureMatrix(const Panel& scaled, std::size_t m)
    : rows_(scaled.rows()), cols_(scaled.cols()), order_(m) {
  if (m < 1 || m > kMaxMomentOrder)
    throw DomainError("moment order must be between 1 and " +
                      std::to_string(kMaxMomentOrder));
  powers_.resize(points() * m);
  for (std::size_t p = 0; p < points(); ++p) {
    const double x = scaled.values()[p];
    if (!(x >= -1.0 && x <= 1.0))
      throw DomainError("feature matrix needs a panel scaled to [-1, 1]");
    double v = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      v *= x;
      powers_[p * m + j] = v;
    }
  }
}

MomentTarget weighted_moments(const FeatureMatrix& features, WeightSlice w) {
  if (w.size() != features.points())
    throw DomainError("weight slice does not match the feature matrix");
  MomentTarget out;
  const std::size_t m = features.order();
  out.mean.assign(m, 0.0);
  for (std::size_t p = 0; p < w.size(); ++p) {
    const double wp = w[p];
    if (wp == 0.0) continue;
    if (wp < 0.0) throw DomainError("weights must be non-negative");
    out.total_weight += wp;
    const auto row = features.powers(p);
    for (std::size_t j = 0; j < m; ++j) out.mean[j] += wp * row[j];
  }
  if (out.total_weight > 0.0)
    for (double& v : out.mean) v /= out.total_weight;
  return out;
}

double weighted_loglik(const LambdaVector& lambda, const MomentTarget& target,
                       const QuadratureRule& quad) {
  if (target.total_weight == 0.0) return 0.0;
  if (target.mean.size() != lambda.order())
    throw DomainError("moment order mismatch");
  double dot = 0.0;
  for (std::size_t j = 0; j < lambda.order(); ++j) dot += lambda[j] * target.mean[j];
  return -target.total_weight * (dot + log_partition(lambda, quad));
}

double weighted_loglik(const LambdaVector& lambda, const FeatureMatrix& features,
                       WeightSlice w, const QuadratureRule& quad) {
  return weighted_loglik(lambda, weighted_moments(features, w), quad);
}

std::vector<double> loglik_gradient(const LambdaVector& lambda,
                                    const MomentTarget& target,
                                    const QuadratureRule& quad) {
  if (target.mean.size() != lambda.order())
    throw DomainError("moment order mismatch");
  std::vector<double> mom(lambda.order());
  log_partition_and_moments(lambda.span(), quad, mom);
  std::vector<double> g(lambda.order());
  for (std::size_t j = 0; j < g.size(); ++j)
    g[j] = target.total_weight * (mom[j] - target.mean[j]);
  return g;
}

std::vector<double> loglik_gradient(const LambdaVector& lambda,
                                    const FeatureMatrix& features, WeightSlice w,
                                    const QuadratureRule& quad) {
  return loglik_gradient(lambda, weighted_moments(features, w), quad);
}

LambdaFit fit_lambda(const MomentTarget& target, std::size_t m,
                     const QuadratureRule& quad, const LambdaFitOptions& options,
                     const LambdaVector* warm_start) {
  if (!(target.total_weight > 0.0)) throw EmptyRegime("regime has zero total weight");
  if (target.mean.size() != m) throw DomainError("moment order mismatch");
  if (!(options.tol > 0.0)) throw DomainError("tolerance must be positive");
  if (options.l1_bound < 0.0) throw DomainError("l1 bound must be non-negative");

  const auto em = static_cast<Eigen::Index>(m);
  const double radius = options.l1_bound;
  const bool bounded = std::isfinite(radius);
  const Vec mu = Eigen::Map<const Vec>(target.mean.data(), em);
  const double weight = target.total_weight;

  Vec lambda = Vec::Zero(em);
  if (warm_start) {
    if (warm_start->order() != m) throw DomainError("warm start order mismatch");
    lambda = Eigen::Map<const Vec>(warm_start->coefficients().data(), em);
    lambda = project(lambda, radius);
  }

  auto to_result = [&](const Vec& v) {
    return LambdaVector(std::vector<double>(v.data(), v.data() + v.size()));
  };

  LambdaFit fit{to_result(lambda), 0.0, 0.0, 0, false, {}};
  if (radius == 0.0) {
    fit.lambda = LambdaVector::zeros(m);
    fit.log_z = std::log(2.0);
    fit.loglik = -weight * fit.log_z;
    fit.trace.push_back(fit.loglik);
    fit.converged = true;
    return fit;
  }

  LocalModel cur = evaluate(lambda, mu, quad, true);
  fit.trace.push_back(weight * cur.value);

  std::size_t iter = 0;
  for (; iter < options.max_iter; ++iter) {
    if (stationarity(lambda, cur.grad, radius) <= options.tol) {
      fit.converged = true;
      break;
    }
    const Vec& ascent = cur.grad;
    Vec dir = newton_direction(cur.curvature, ascent);
    if (bounded && (lambda + dir).lpNorm<1>() > radius)
      dir = solve_l1_qp(cur.curvature, ascent, lambda, radius) - lambda;

    bool accepted = false;
    double slope = ascent.dot(dir);
    if (slope > 0.0) {
      double step = 1.0;
      for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
        const Vec trial = lambda + step * dir;
        LocalModel next = evaluate(trial, mu, quad, true);
        if (!std::isfinite(next.value)) continue;
        // Along a line the objective is concave: a non-negative directional
        // derivative at the trial point implies the value did not decrease.
        const bool armijo = next.value >= cur.value + 1e-4 * step * slope;
        const bool uphill = next.grad.dot(dir) >= 0.0 && next.value >= cur.value - 1e-15 * (1.0 + std::abs(cur.value));
        if (armijo || uphill) {
          lambda = trial;
          cur = std::move(next);
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      // Projected-gradient fallback.
      double step = 1.0;
      for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
        const Vec trial = project(lambda + step * ascent, radius);
        LocalModel next = evaluate(trial, mu, quad, true);
        if (std::isfinite(next.value) && next.value > cur.value) {
          lambda = trial;
          cur = std::move(next);
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      // No representable improvement left.
      fit.converged = stationarity(lambda, cur.grad, radius) <= std::sqrt(options.tol);
      break;
    }
    fit.trace.push_back(weight * cur.value);
  }
  fit.iterations = iter;
  fit.lambda = to_result(lambda);
  fit.log_z = cur.log_z;
  fit.loglik = weight * cur.value;
  return fit;
}

LambdaFit fit_lambda(const FeatureMatrix& features, WeightSlice w,
                     const QuadratureRule& quad, const LambdaFitOptions& options,
                     const LambdaVector* warm_start) {
  return fit_lambda(weighted_moments(features, w), features.order(), quad, options,
                    warm_start);
}

Sparsified sparsify(const LambdaVector& lambda, double eps) {
  if (eps < 0.0) throw DomainError("sparsity threshold must be non-negative");
  std::vector<double> c = lambda.coefficients();
  std::size_t active = 0;
  for (double& v : c) {
    if (std::abs(v) < eps) v = 0.0;
    if (v != 0.0) ++active;
  }
  return {LambdaVector(std::move(c)), active};
}

std::vector<double> project_l1_ball(std::span<const double> v, double radius) {
  std::vector<double> out(v.begin(), v.end());
  if (!std::isfinite(radius)) return out;
  if (radius <= 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  double norm = 0.0;
  for (double x : v) norm += std::abs(x);
  if (norm <= radius) return out;
  std::vector<double> u(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) u[j] = std::abs(v[j]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - radius) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  for (double& x : out) {
    const double a = std::abs(x) - theta;
    x = a > 0.0 ? std::copysign(a, x) : 0.0;
  }
  return out;
}

}  // namespace tvent
