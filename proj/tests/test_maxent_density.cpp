#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "tvent/error.hpp"
#include "tvent/maxent_density.hpp"
#include "tvent/quadrature.hpp"

using namespace tvent;

namespace {

const QuadratureRule& quad() {
  static const QuadratureRule q(200);
  return q;
}

// Composite Simpson on [-1, 1]; independent of the Gauss-Legendre rule.
template <class F>
double simpson(F f, std::size_t panels = 20000) {
  const double h = 2.0 / static_cast<double>(panels);
  double s = f(-1.0) + f(1.0);
  for (std::size_t k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * f(-1.0 + h * static_cast<double>(k));
  return s * h / 3.0;
}

LambdaVector random_lambda(std::mt19937_64& rng, std::size_t m, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> c(m);
  for (double& v : c) v = u(rng);
  return LambdaVector(c);
}

}  // namespace

TEST_CASE("Gauss-Legendre rule") {
  const auto& q = quad();
  CHECK(q.order() == 200);
  double sum = 0.0;
  for (double w : q.weights()) {
    CHECK(w > 0.0);
    sum += w;
  }
  CHECK(std::abs(sum - 2.0) < 1e-12);
  const QuadratureRule small(5);
  // Exact for degree <= 9: int x^8 = 2/9.
  double acc = 0.0;
  for (std::size_t k = 0; k < small.order(); ++k) acc += small.weights()[k] * std::pow(small.nodes()[k], 8);
  CHECK(acc == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("LambdaVector validation") {
  CHECK_THROWS_AS(LambdaVector(std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(LambdaVector(std::vector<double>(13, 0.0)), DomainError);
  CHECK_THROWS_AS(LambdaVector(std::vector<double>{NAN}), DomainError);
  const LambdaVector l({1.0, -2.0, 0.5});
  CHECK(l.l1_norm() == 3.5);
  CHECK(l.polynomial(2.0) == doctest::Approx(1.0 * 2 - 2.0 * 4 + 0.5 * 8));
}

TEST_CASE("log_partition closed forms") {
  CHECK(log_partition(LambdaVector::zeros(6), quad()) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(std::abs(log_partition(LambdaVector({1, 0, 0, 0, 0, 0}), quad()) -
                 std::log(std::exp(1.0) - std::exp(-1.0))) < 1e-12);
  CHECK(std::abs(log_partition(LambdaVector({0, 1, 0, 0, 0, 0}), quad()) -
                 std::log(std::sqrt(M_PI) * std::erf(1.0))) < 1e-12);
  // Large coefficients stay finite thanks to the max shift.
  const double big = log_partition(LambdaVector({0, -500, 0, 0, 0, 0}), quad());
  CHECK(std::isfinite(big));
  CHECK(big > 400.0);
}

TEST_CASE("density values and normalization") {
  CHECK(density(LambdaVector::zeros(3), 0.3, quad()) == doctest::Approx(0.5));
  CHECK(density(LambdaVector({0, 1}), 0.0, quad()) ==
        doctest::Approx(1.0 / (std::sqrt(M_PI) * std::erf(1.0))).epsilon(1e-12));
  CHECK_THROWS_AS(density(LambdaVector::zeros(2), 1.5, quad()), DomainError);

  std::mt19937_64 rng(1);
  for (int r = 0; r < 50; ++r) {
    const auto lam = random_lambda(rng, 6, 3.0);
    const double mass = simpson([&](double x) { return density(lam, x, quad()); });
    CHECK(std::abs(mass - 1.0) < 1e-10);
  }
}

TEST_CASE("moments") {
  const auto u = moments(LambdaVector::zeros(4), quad(), 4);
  CHECK(std::abs(u[0]) < 1e-15);
  CHECK(u[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(std::abs(u[2]) < 1e-15);
  CHECK(u[3] == doctest::Approx(0.2).epsilon(1e-13));
  CHECK(std::abs(moments(LambdaVector({0, 1}), quad(), 1)[0]) < 1e-15);

  // E[X] under e^{-x}: (int x e^{-x}) / Z by Simpson.
  const LambdaVector l({1, 0, 0, 0, 0, 0});
  const double z = simpson([](double x) { return std::exp(-x); });
  const double ex = simpson([](double x) { return x * std::exp(-x); }) / z;
  CHECK(std::abs(moments(l, quad(), 1)[0] - ex) < 1e-9);

  // Midpoint Riemann sum with 10^6 panels.
  std::mt19937_64 rng(4);
  const auto lam = random_lambda(rng, 6, 2.0);
  const std::size_t N = 1000000;
  std::vector<double> acc(6, 0.0);
  double zz = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const double x = -1.0 + (static_cast<double>(k) + 0.5) * 2.0 / static_cast<double>(N);
    const double f = std::exp(-lam.polynomial(x));
    zz += f;
    double p = 1.0;
    for (std::size_t j = 0; j < 6; ++j) acc[j] += f * (p *= x);
  }
  const auto mu = moments(lam, quad(), 6);
  for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(mu[j] - acc[j] / zz) < 1e-7);
  for (std::size_t j = 0; j < 6; ++j) {
    if (j % 2) CHECK((mu[j] >= 0.0 && mu[j] <= 1.0));
    else CHECK(std::abs(mu[j]) <= 1.0);
  }
}

TEST_CASE("cdf and quantile") {
  const MaxEntDistribution uniform(LambdaVector::zeros(6), quad());
  CHECK(std::abs(uniform.quantile(0.5)) < 1e-10);
  CHECK(uniform.quantile(0.05) == doctest::Approx(-0.9).epsilon(1e-9));
  CHECK(uniform.cdf(-1.0) == 0.0);
  CHECK(uniform.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(uniform.quantile(0.0), DomainError);
  CHECK_THROWS_AS(uniform.quantile(1.0), DomainError);

  const MaxEntDistribution sym(LambdaVector({0, 3, 0, -1}), quad());
  CHECK(std::abs(sym.quantile(0.5)) < 1e-8);

  std::mt19937_64 rng(8);
  for (int r = 0; r < 20; ++r) {
    const MaxEntDistribution d(random_lambda(rng, 6, 4.0), quad());
    double prev = 0.0;
    for (int k = 0; k <= 40; ++k) {
      const double c = d.cdf(-1.0 + 0.05 * k);
      CHECK(c >= prev - 1e-15);
      prev = c;
    }
    for (double a : {0.01, 0.05, 0.5, 0.95})
      CHECK(std::abs(d.cdf(d.quantile(a)) - a) < 1e-6);
    for (double x : {-0.7, 0.0, 0.4})
      CHECK(std::abs(d.quantile(d.cdf(x)) - x) < 1e-6);
    // CDF against Simpson of the density.
    const double x0 = 0.3;
    const double ref = simpson([&](double x) { return x <= x0 ? d.density(x) : 0.0; }, 200000);
    CHECK(std::abs(d.cdf(x0) - ref) < 1e-4);
  }
}

TEST_CASE("sampling") {
  const auto u = sample(LambdaVector::zeros(2), 100000, 3, quad());
  const double mean = std::accumulate(u.begin(), u.end(), 0.0) / 1e5;
  double m2 = 0.0;
  for (double x : u) m2 += x * x;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(m2 / 1e5 - 1.0 / 3.0) < 0.01);
  CHECK(sample(LambdaVector::zeros(2), 100, 9, quad()) == sample(LambdaVector::zeros(2), 100, 9, quad()));

  const LambdaVector peaked({0, 5, 0, 0, 0, 0});
  const auto s = sample(peaked, 100000, 4, quad());
  double sm = 0.0, ss = 0.0;
  for (double x : s) sm += x;
  sm /= 1e5;
  for (double x : s) ss += (x - sm) * (x - sm);
  const auto mu = moments(peaked, quad(), 2);
  const double var = mu[1] - mu[0] * mu[0];
  CHECK(std::abs(ss / 1e5 / var - 1.0) < 0.02);
}

TEST_CASE("entropy") {
  CHECK(entropy(LambdaVector::zeros(6), quad()) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const LambdaVector g({0, 1, 0, 0, 0, 0});
  const double lz = log_partition(g, quad());
  const double direct = simpson([&](double x) {
    const double lf = -g.polynomial(x) - lz;
    return -std::exp(lf) * lf;
  });
  CHECK(std::abs(entropy(g, quad()) - direct) < 1e-8);
  std::mt19937_64 rng(2);
  for (int r = 0; r < 100; ++r)
    CHECK(entropy(random_lambda(rng, 6, 50.0), quad()) <= std::log(2.0) + 1e-10);
}
