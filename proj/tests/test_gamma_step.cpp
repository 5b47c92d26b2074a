#include <cmath>
#include <random>

#include "doctest.h"
#include "tvent/gamma_step.hpp"
#include "tvent/simplex.hpp"

using namespace tvent;

namespace {

ScoreTensor random_scores(std::size_t K, std::size_t n, std::size_t T, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  ScoreTensor a(K, n, T);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < n; ++i) a(k, t, i) = nd(rng);
  return a;
}

// Best binary affiliation under the budget, by exhaustive enumeration.
double binary_max(const ScoreTensor& a, double budget) {
  const std::size_t K = a.regimes(), n = a.dims(), T = a.length();
  const std::size_t cells = n * T;
  std::size_t total = 1;
  for (std::size_t c = 0; c < cells; ++c) total *= K;
  double best = -INFINITY;
  std::vector<std::vector<int>> labels(n, std::vector<int>(T));
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t < T; ++t) {
        labels[i][t] = static_cast<int>(c % K);
        c /= K;
      }
    const auto g = AffiliationField::from_labels(K, labels);
    bool ok = true;
    for (std::size_t k = 0; k < K && ok; ++k) ok = tv_norm(g, k) <= budget + 1e-12;
    if (ok) best = std::max(best, lp_objective(a, g));
  }
  return best;
}

// The LP written out in full: gamma plus eta >= |gamma_{t+1} - gamma_t|.
double full_lp(const ScoreTensor& a, double budget) {
  const std::size_t K = a.regimes(), n = a.dims(), T = a.length();
  const std::size_t ng = K * n * T, ne = K * n * (T - 1);
  auto gi = [&](std::size_t k, std::size_t t, std::size_t i) { return (k * n + i) * T + t; };
  auto ei = [&](std::size_t k, std::size_t t, std::size_t i) { return ng + (k * n + i) * (T - 1) + t; };
  lp::Problem p;
  p.objective.assign(ng + ne, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < n; ++i) p.objective[gi(k, t, i)] = a(k, t, i);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < n; ++i) {
      lp::Constraint c{std::vector<double>(ng + ne, 0.0), lp::Sense::Equal, 1.0};
      for (std::size_t k = 0; k < K; ++k) c.coefficients[gi(k, t, i)] = 1.0;
      p.rows.push_back(c);
    }
  for (std::size_t k = 0; k < K; ++k) {
    lp::Constraint b{std::vector<double>(ng + ne, 0.0), lp::Sense::LessEqual, budget};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t + 1 < T; ++t) {
        b.coefficients[ei(k, t, i)] = 1.0;
        for (double s : {1.0, -1.0}) {
          lp::Constraint c{std::vector<double>(ng + ne, 0.0), lp::Sense::LessEqual, 0.0};
          c.coefficients[gi(k, t + 1, i)] = s;
          c.coefficients[gi(k, t, i)] = -s;
          c.coefficients[ei(k, t, i)] = -1.0;
          p.rows.push_back(c);
        }
      }
    p.rows.push_back(b);
  }
  const auto s = lp::solve(p);
  REQUIRE(s.status == lp::Status::Optimal);
  return s.objective;
}

void check_feasible(const AffiliationField& g, double budget) {
  for (std::size_t t = 0; t < g.length(); ++t)
    for (std::size_t i = 0; i < g.dims(); ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < g.regimes(); ++k) {
        CHECK(g(k, t, i) >= -1e-12);
        s += g(k, t, i);
      }
      CHECK(std::abs(s - 1.0) <= 1e-9);
    }
  for (std::size_t k = 0; k < g.regimes(); ++k) CHECK(tv_norm(g, k) <= budget + 1e-7);
}

}  // namespace

TEST_CASE("build_scores") {
  const Panel p(3, 1, {-0.5, 0.0, 0.7});
  const FeatureMatrix f(p, 2);
  const QuadratureRule q(200);
  const LambdaVector zero = LambdaVector::zeros(2), g({0.0, 1.0});
  const auto a = build_scores({zero, g, g}, {log_partition(zero, q), log_partition(g, q), log_partition(g, q)}, f);
  const double lz = std::log(std::sqrt(M_PI) * std::erf(1.0));
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(a(0, t, 0) == doctest::Approx(-std::log(2.0)).epsilon(1e-13));
    CHECK(std::abs(a(1, t, 0) + p(t, 0) * p(t, 0) + lz) < 1e-12);
    CHECK(a(1, t, 0) == a(2, t, 0));
  }
}

TEST_CASE("tv_norm") {
  CHECK(tv_norm(AffiliationField::constant(2, 3, 10, 1), 0) == 0.0);
  const auto one = AffiliationField::from_labels(2, {{0, 0, 1, 1}});
  CHECK(tv_norm(one, 0) == 1.0);
  CHECK(tv_norm(one, 1) == 1.0);
  const auto two = AffiliationField::from_labels(2, {{0, 1, 1, 0}, {1, 0, 0, 1}});
  CHECK(tv_norm(two, 0) == 4.0);
  AffiliationField frac(2, 1, 3);
  frac(0, 0, 0) = 1.0;
  frac(0, 1, 0) = 0.25;
  frac(0, 2, 0) = 0.5;
  CHECK(tv_norm(frac, 0) == doctest::Approx(1.0));
}

TEST_CASE("solve_gamma single regime") {
  std::mt19937_64 rng(1);
  const auto a = random_scores(1, 2, 7, rng);
  for (double c : {0.0, 3.0}) {
    const auto s = solve_gamma(a, c);
    for (double v : s.gamma.data()) CHECK(v == 1.0);
  }
}

TEST_CASE("solve_gamma on a four-step switch") {
  ScoreTensor a(2, 1, 4);
  const double s0[] = {0.0, -0.1, -2.0, -3.0};
  const double s1[] = {-1.5, -2.5, 0.0, -0.2};
  for (std::size_t t = 0; t < 4; ++t) {
    a(0, t, 0) = s0[t];
    a(1, t, 0) = s1[t];
  }
  SUBCASE("budget allows the switch") {
    const auto s = solve_gamma(a, 1.0);
    CHECK(s.gamma.hard_labels(0) == std::vector<int>{0, 0, 1, 1});
    CHECK(s.objective == doctest::Approx(0.0 - 0.1 + 0.0 - 0.2).epsilon(1e-12));
    CHECK(s.objective == doctest::Approx(binary_max(a, 1.0)));
  }
  SUBCASE("zero budget forces a constant path") {
    const auto s = solve_gamma(a, 0.0);
    // sum s0 = -5.1, sum s1 = -4.2
    CHECK(s.gamma.hard_labels(0) == std::vector<int>{1, 1, 1, 1});
    CHECK(s.objective == doctest::Approx(-4.2));
    CHECK(tv_norm(s.gamma, 0) <= 1e-12);
  }
}

TEST_CASE("slack budget puts mass on the pointwise argmax") {
  std::mt19937_64 rng(2);
  const auto a = random_scores(3, 2, 12, rng);
  const auto s = solve_gamma(a, 100.0);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t t = 0; t < 12; ++t) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < 3; ++k)
        if (a(k, t, i) > a(best, t, i)) best = k;
      CHECK(s.gamma(best, t, i) == doctest::Approx(1.0));
    }
}

TEST_CASE("solve_gamma matches the full LP and dominates binary paths") {
  std::mt19937_64 rng(3);
  int binary_hits = 0;
  for (int r = 0; r < 60; ++r) {
    const std::size_t K = 2 + r % 2, n = 1 + (r / 2) % 2, T = (K == 3 && n == 2) ? 4 : 6;
    const auto a = random_scores(K, n, T, rng);
    const double budget = static_cast<double>(r % 4) + (r % 5 == 0 ? 0.5 : 0.0);
    const auto s = solve_gamma(a, budget);
    REQUIRE(s.optimal);
    check_feasible(s.gamma, budget);
    CHECK(std::abs(s.objective - lp_objective(a, s.gamma)) < 1e-9);
    CHECK(std::abs(s.objective - full_lp(a, budget)) < 1e-8);
    const double bin = binary_max(a, budget);
    CHECK(s.objective >= bin - 1e-9);
    bool binary = true;
    for (double v : s.gamma.data()) binary = binary && (v < 1e-9 || v > 1 - 1e-9);
    if (binary) {
      ++binary_hits;
      CHECK(std::abs(s.objective - bin) < 1e-9);
    }
  }
  CHECK(binary_hits > 0);
}

TEST_CASE("solve_gamma does not decrease the objective of the previous field") {
  std::mt19937_64 rng(4);
  for (int r = 0; r < 30; ++r) {
    const auto a = random_scores(3, 2, 30, rng);
    const auto prev = AffiliationField::constant(3, 2, 30, r % 3);
    const auto s = solve_gamma(a, 2.0, &prev);
    check_feasible(s.gamma, 2.0);
    CHECK(s.objective >= lp_objective(a, prev) - 1e-9);
  }
}

TEST_CASE("ties keep the previous field") {
  ScoreTensor a(2, 1, 5, -1.0);
  const auto prev = AffiliationField::from_labels(2, {{1, 1, 1, 0, 0}});
  const auto s = solve_gamma(a, 1.0, &prev);
  CHECK(s.gamma == prev);
}
