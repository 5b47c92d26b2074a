#include <cmath>
#include <random>

#include "doctest.h"
#include "tvent/error.hpp"
#include "tvent/lambda_step.hpp"

using namespace tvent;

namespace {

const QuadratureRule& quad() {
  static const QuadratureRule q(200);
  return q;
}

Panel uniform_panel(std::size_t T, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(T);
  for (double& x : v) x = u(rng);
  return Panel::from_series(v);
}

std::vector<double> random_weights(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(n);
  for (double& x : w) x = u(rng);
  return w;
}

LambdaVector random_lambda(std::mt19937_64& rng, std::size_t m, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> c(m);
  for (double& v : c) v = u(rng);
  return LambdaVector(c);
}

// Bisection on the soft-threshold level.
std::vector<double> l1_projection_oracle(const std::vector<double>& v, double r) {
  double l1 = 0.0;
  for (double x : v) l1 += std::abs(x);
  if (l1 <= r) return v;
  double lo = 0.0, hi = 0.0;
  for (double x : v) hi = std::max(hi, std::abs(x));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double s = 0.0;
    for (double x : v) s += std::max(std::abs(x) - mid, 0.0);
    (s > r ? lo : hi) = mid;
  }
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j)
    out[j] = std::copysign(std::max(std::abs(v[j]) - hi, 0.0), v[j]);
  return out;
}

}  // namespace

TEST_CASE("weighted_loglik") {
  const Panel p = uniform_panel(50, 1);
  const FeatureMatrix f(p, 4);
  std::mt19937_64 rng(2);
  const auto w = random_weights(50, rng);
  double W = 0.0;
  for (double x : w) W += x;
  CHECK(weighted_loglik(LambdaVector::zeros(4), f, w, quad()) ==
        doctest::Approx(-W * std::log(2.0)).epsilon(1e-13));
  const std::vector<double> zero(50, 0.0);
  CHECK(weighted_loglik(random_lambda(rng, 4, 3.0), f, zero, quad()) == 0.0);

  // T=5, m=2 against a direct sum with ln Z from Simpson.
  const Panel small(5, 1, {-0.9, -0.3, 0.0, 0.4, 0.8});
  const FeatureMatrix fs(small, 2);
  const LambdaVector lam({0.7, -1.3});
  const std::vector<double> ws{0.2, 1.0, 0.5, 0.0, 0.9};
  const std::size_t N = 200000;
  double z = 0.0;
  for (std::size_t k = 0; k <= N; ++k) {
    const double x = -1.0 + 2.0 * static_cast<double>(k) / N;
    z += (k == 0 || k == N ? 1.0 : (k % 2 ? 4.0 : 2.0)) * std::exp(-(0.7 * x - 1.3 * x * x));
  }
  z *= 2.0 / N / 3.0;
  double direct = 0.0;
  for (std::size_t t = 0; t < 5; ++t) {
    const double x = small(t, 0);
    direct -= ws[t] * (0.7 * x - 1.3 * x * x + std::log(z));
  }
  CHECK(std::abs(weighted_loglik(lam, fs, ws, quad()) - direct) < 1e-12);

  const MomentTarget target = weighted_moments(fs, ws);
  CHECK(target.total_weight == doctest::Approx(2.6));
  CHECK(weighted_loglik(lam, target, quad()) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("loglik_gradient matches finite differences") {
  std::mt19937_64 rng(3);
  const Panel p = uniform_panel(80, 4);
  const FeatureMatrix f(p, 6);
  for (int r = 0; r < 100; ++r) {
    const auto w = random_weights(80, rng);
    const auto lam = random_lambda(rng, 6, 2.0);
    const auto g = loglik_gradient(lam, f, w, quad());
    const double h = 1e-5;
    for (std::size_t j = 0; j < 6; ++j) {
      auto up = lam.coefficients(), dn = lam.coefficients();
      up[j] += h;
      dn[j] -= h;
      const double fd = (weighted_loglik(LambdaVector(up), f, w, quad()) -
                         weighted_loglik(LambdaVector(dn), f, w, quad())) / (2 * h);
      CHECK(std::abs(g[j] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("gradient at lambda = 0 on symmetric data") {
  const Panel p(4, 1, {-0.5, 0.5, -0.2, 0.2});
  const FeatureMatrix f(p, 4);
  const std::vector<double> w(4, 1.0);
  const auto g = loglik_gradient(LambdaVector::zeros(4), f, w, quad());
  CHECK(std::abs(g[0]) < 1e-14);
  CHECK(std::abs(g[2]) < 1e-14);
  const double mu2 = (0.25 + 0.25 + 0.04 + 0.04) / 4.0;
  CHECK(g[1] == doctest::Approx(4.0 * (1.0 / 3.0 - mu2)).epsilon(1e-12));
}

TEST_CASE("fit_lambda recovers known densities") {
  SUBCASE("uniform data") {
    const FeatureMatrix f(uniform_panel(10000, 7), 2);
    const std::vector<double> w(10000, 1.0);
    const auto r = fit_lambda(f, w, quad());
    CHECK(r.converged);
    CHECK(std::abs(r.lambda[0]) <= 0.05);
    CHECK(std::abs(r.lambda[1]) <= 0.05);
  }
  SUBCASE("truncated Gaussian") {
    const LambdaVector truth({0.0, 4.0});
    const auto x = sample(truth, 10000, 21, quad());
    const FeatureMatrix f(Panel::from_series(x), 2);
    const std::vector<double> w(10000, 1.0);
    const auto r = fit_lambda(f, w, quad());
    CHECK(r.converged);
    CHECK(std::abs(r.lambda[1] - 4.0) <= 0.2);
    CHECK(std::abs(r.lambda[0]) <= 0.2);
    const auto g = loglik_gradient(r.lambda, f, w, quad());
    for (double v : g) CHECK(std::abs(v) / 10000.0 < 1e-6);
  }
  SUBCASE("zero bound") {
    const FeatureMatrix f(uniform_panel(100, 8), 4);
    const std::vector<double> w(100, 1.0);
    LambdaFitOptions o;
    o.l1_bound = 0.0;
    const auto r = fit_lambda(f, w, quad(), o);
    for (double c : r.lambda.coefficients()) CHECK(c == 0.0);
  }
  SUBCASE("empty regime") {
    const FeatureMatrix f(uniform_panel(10, 9), 2);
    const std::vector<double> w(10, 0.0);
    CHECK_THROWS_AS(fit_lambda(f, w, quad()), EmptyRegime);
  }
}

TEST_CASE("fit_lambda respects the l1 bound and increases monotonically") {
  std::mt19937_64 rng(12);
  for (int r = 0; r < 30; ++r) {
    const auto x = sample(random_lambda(rng, 6, 6.0), 400, 100 + r, quad());
    const FeatureMatrix f(Panel::from_series(x), 6);
    const auto w = random_weights(400, rng);
    const auto free_fit = fit_lambda(f, w, quad());
    for (double scale : {0.1, 0.5, 0.9}) {
      LambdaFitOptions o;
      o.l1_bound = scale * free_fit.lambda.l1_norm();
      const auto fit = fit_lambda(f, w, quad(), o);
      CHECK(fit.lambda.l1_norm() <= o.l1_bound + 1e-9);
      CHECK(fit.loglik <= free_fit.loglik + 1e-9);
      for (std::size_t s = 1; s < fit.trace.size(); ++s)
        CHECK(fit.trace[s] >= fit.trace[s - 1] - 1e-12);
    }
    for (std::size_t s = 1; s < free_fit.trace.size(); ++s)
      CHECK(free_fit.trace[s] >= free_fit.trace[s - 1] - 1e-12);
    // Interior optimum: model moments match the weighted sample moments.
    const auto target = weighted_moments(f, w);
    const auto mu = moments(free_fit.lambda, quad(), 6);
    for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(mu[j] - target.mean[j]) < 1e-6);
  }
}

TEST_CASE("log-likelihood is concave along segments") {
  std::mt19937_64 rng(13);
  const FeatureMatrix f(uniform_panel(60, 14), 6);
  for (int r = 0; r < 30; ++r) {
    const auto w = random_weights(60, rng);
    const auto a = random_lambda(rng, 6, 5.0);
    const auto b = random_lambda(rng, 6, 5.0);
    std::vector<double> vals;
    for (int s = 0; s <= 12; ++s) {
      const double t = s / 12.0;
      std::vector<double> c(6);
      for (std::size_t j = 0; j < 6; ++j) c[j] = (1 - t) * a[j] + t * b[j];
      vals.push_back(weighted_loglik(LambdaVector(c), f, w, quad()));
    }
    for (int s = 1; s < 12; ++s)
      CHECK(vals[s] >= 0.5 * (vals[s - 1] + vals[s + 1]) - 1e-9 * std::abs(vals[s]));
  }
}

TEST_CASE("sparsify") {
  const auto s = sparsify(LambdaVector({3, 1e-9, 2, 0, 0, 0}), 1e-5);
  CHECK(s.lambda == LambdaVector({3, 0, 2, 0, 0, 0}));
  CHECK(s.active_count == 2);
  CHECK(sparsify(LambdaVector::zeros(6)).active_count == 0);
  const LambdaVector l({1e-12, -4, 1e-7});
  CHECK(sparsify(l, 0.0).lambda == l);
  CHECK(sparsify(l, 0.0).active_count == 3);
}

TEST_CASE("project_l1_ball matches a bisection oracle") {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> nd(0.0, 3.0);
  for (int r = 0; r < 200; ++r) {
    std::vector<double> v(1 + r % 12);
    for (double& x : v) x = nd(rng);
    const double radius = std::abs(nd(rng));
    const auto got = project_l1_ball(v, radius);
    const auto want = l1_projection_oracle(v, radius);
    double l1 = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      CHECK(std::abs(got[j] - want[j]) < 1e-9);
      l1 += std::abs(got[j]);
    }
    CHECK(l1 <= radius + 1e-9);
  }
  const std::vector<double> inside{0.1, -0.2};
  CHECK(project_l1_ball(inside, 1.0) == inside);
}
