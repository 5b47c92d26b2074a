#include <cmath>
#include <random>

#include "doctest.h"
#include "tvent/diagnostics.hpp"
#include "tvent/error.hpp"
#include "tvent/estimator.hpp"

using namespace tvent;

namespace {

Panel scaled_synthetic(double v2, std::uint64_t seed, std::size_t length = 1000) {
  return rescale(gen_two_regime_gaussian(v2, length, 250, seed).panel).scaled;
}

ModelConfig small_config(std::size_t K, double C) {
  ModelConfig c;
  c.regimes = K;
  c.switch_budget = C;
  c.anneal_restarts = 3;
  return c;
}

FitResult manual_fit(std::vector<LambdaVector> lambdas, AffiliationField gamma) {
  FitResult f;
  f.lambdas = std::move(lambdas);
  f.gamma = std::move(gamma);
  return f;
}

}  // namespace

TEST_CASE("ModelConfig validation") {
  ModelConfig c;
  CHECK_NOTHROW(c.validate());
  c.regimes = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = ModelConfig{};
  c.switch_budget = -1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = ModelConfig{};
  c.anneal_restarts = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = ModelConfig{};
  c.moment_order = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = ModelConfig{};
  c.l1_bounds = {1.0};
  CHECK(c.l1_bound(1) == 1.0);
  c.l1_bounds = {1.0, 2.0};
  CHECK(c.l1_bound(1) == 2.0);
  CHECK(std::isinf(ModelConfig{}.l1_bound(0)));
}

TEST_CASE("compose_lambda") {
  const std::vector<LambdaVector> ls{LambdaVector({2, 0, 0}), LambdaVector({0, 2, 0})};
  const std::vector<double> e1{0.0, 1.0};
  CHECK(compose_lambda(e1, ls) == ls[1]);
  const std::vector<double> half{0.5, 0.5};
  CHECK(compose_lambda(half, ls) == LambdaVector({1, 1, 0}));
  const std::vector<LambdaVector> same{LambdaVector({1, -2, 3}), LambdaVector({1, -2, 3}), LambdaVector({1, -2, 3})};
  const std::vector<double> third{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto c = compose_lambda(third, same);
  for (std::size_t j = 0; j < 3; ++j) CHECK(c[j] == doctest::Approx(same[0][j]).epsilon(1e-15));
}

TEST_CASE("param_count and bic") {
  const LambdaVector dense({1, 2, 3, 4, 5, 6});
  auto one = manual_fit({dense}, AffiliationField::constant(1, 1, 10, 0));
  CHECK(param_count(one) == 6);
  auto two = manual_fit({dense, dense}, AffiliationField::from_labels(2, {{0, 0, 1, 1}}));
  CHECK(segment_count(two.gamma) == 2);
  CHECK(param_count(two) == 14);
  auto sparse = manual_fit({LambdaVector({1, 0, 3, 1e-9, 5, 6}), dense},
                           AffiliationField::from_labels(2, {{0, 0, 1, 1}}));
  CHECK(param_count(sparse) == 12);
  auto multi = manual_fit({dense, dense}, AffiliationField::from_labels(2, {{0, 1, 0}, {1, 1, 1}}));
  CHECK(segment_count(multi.gamma) == 4);

  CHECK(bic(0.0, 1, 1) == 0.0);
  CHECK(bic(-1.0, 2, 100) == doctest::Approx(2.0 + 2.0 * std::log(100.0)));
  CHECK(bic(-3.0, 8, 50) - bic(-3.0, 4, 50) == doctest::Approx(4.0 * std::log(50.0)));
}

TEST_CASE("schwarz weights") {
  const std::vector<double> eq(5, 12.5);
  for (double w : schwarz_weights(eq)) CHECK(w == doctest::Approx(0.2));
  const std::vector<double> d{100.0, 102.0};
  const auto w = schwarz_weights(d);
  CHECK(w[0] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(w[1] == doctest::Approx(0.2689).epsilon(1e-4));
  const std::vector<double> far{-5000.0, -4950.0};
  const auto f = schwarz_weights(far);
  CHECK(f[0] > 0.99999);
  CHECK(f[1] < 1e-10);
  CHECK(f[0] + f[1] == doctest::Approx(1.0));
}

TEST_CASE("single regime equals a pooled stationary fit") {
  const Panel p = scaled_synthetic(4.0, 3, 600);
  const auto cfg = small_config(1, 5.0);
  const auto r = fit(p, cfg);
  const FeatureMatrix f(p, cfg.moment_order);
  const QuadratureRule q(cfg.quad_order);
  const std::vector<double> w(f.points(), 1.0);
  const auto pooled = fit_lambda(f, w, q);
  for (std::size_t j = 0; j < cfg.moment_order; ++j)
    CHECK(r.lambdas[0][j] == doctest::Approx(pooled.lambda[j]).epsilon(1e-6).scale(1.0));
  CHECK(r.loglik == doctest::Approx(pooled.loglik).epsilon(1e-10));
  CHECK(r.param_count == 6);
}

TEST_CASE("fit invariants") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Panel p = scaled_synthetic(4.0, seed);
    auto cfg = small_config(2, 3.0);
    cfg.seed = seed;
    const auto r = fit(p, cfg);
    for (std::size_t s = 1; s < r.trace.size(); ++s) CHECK(r.trace[s] >= r.trace[s - 1] - 1e-9);
    const FeatureMatrix f(p, cfg.moment_order);
    const QuadratureRule q(cfg.quad_order);
    CHECK(std::abs(total_loglik(f, r.gamma, r.lambdas, q) - r.loglik) <= 1e-9 * std::max(1.0, std::abs(r.loglik)));
    CHECK(r.bic == doctest::Approx(bic(r, 1, 1000)));
    CHECK(r.param_count == param_count(r));
    for (std::size_t k = 0; k < 2; ++k) CHECK(tv_norm(r.gamma, k) <= 3.0 + 1e-7);
    const auto again = fit(p, cfg);
    CHECK(again.gamma == r.gamma);
    CHECK(again.lambdas == r.lambdas);
    CHECK(again.trace == r.trace);
  }
}

TEST_CASE("initial affiliation respects the budget") {
  for (double C : {0.0, 1.0, 2.5, 7.0}) {
    const auto g = random_initial_affiliation(3, 2, 200, C, 17);
    for (std::size_t k = 0; k < 3; ++k) CHECK(tv_norm(g, k) <= C + 1e-12);
    for (double v : g.data()) CHECK((v == 0.0 || v == 1.0));
  }
  CHECK(random_initial_affiliation(2, 1, 50, 3, 5) == random_initial_affiliation(2, 1, 50, 3, 5));
}

TEST_CASE("anneal") {
  const Panel p = scaled_synthetic(2.0, 9);
  auto cfg = small_config(2, 3.0);
  cfg.anneal_restarts = 1;
  cfg.seed = 5;
  const auto one = anneal(p, cfg);
  const auto direct = fit(p, cfg);
  CHECK(one.gamma == direct.gamma);
  CHECK(one.loglik == direct.loglik);
  cfg.anneal_restarts = 10;
  const auto ten = anneal(p, cfg);
  CHECK(ten.loglik >= one.loglik);
  const auto ten_parallel = anneal(p, cfg, 3);
  CHECK(ten_parallel.gamma == ten.gamma);
  CHECK(ten_parallel.lambdas == ten.lambdas);
  CHECK(ten_parallel.seed == ten.seed);
}

TEST_CASE("duplicating a regime keeps L and raises BIC") {
  const Panel p = scaled_synthetic(4.0, 2);
  const auto r = fit(p, small_config(2, 3.0));
  const FeatureMatrix f(p, 6);
  const QuadratureRule q(200);
  AffiliationField g3(3, 1, 1000);
  for (std::size_t t = 0; t < 1000; ++t) {
    g3(0, t, 0) = r.gamma(0, t, 0);
    g3(1, t, 0) = 0.5 * r.gamma(1, t, 0);
    g3(2, t, 0) = 0.5 * r.gamma(1, t, 0);
  }
  auto dup = manual_fit({r.lambdas[0], r.lambdas[1], r.lambdas[1]}, g3);
  const double L3 = total_loglik(f, dup.gamma, dup.lambdas, q);
  CHECK(L3 == doctest::Approx(r.loglik).epsilon(1e-12));
  dup.loglik = L3;
  CHECK(bic(dup, 1, 1000) > r.bic);
}

TEST_CASE("light regimes make the fit ill-posed") {
  const Panel p = scaled_synthetic(4.0, 1, 300);
  auto cfg = small_config(2, 3.0);
  cfg.min_regime_weight = 1000.0;
  const auto r = fit(p, cfg);
  CHECK(r.ill_posed);
  cfg.min_regime_weight = 0.0;
  CHECK_FALSE(fit(p, cfg).ill_posed);
}

TEST_CASE("grid search") {
  const Panel p = scaled_synthetic(6.0, 4);
  ModelConfig base = small_config(1, 1.0);
  SUBCASE("single cell") {
    GridSearchOptions o;
    o.regimes = {1};
    o.switch_budgets = {2.0};
    o.stage2 = false;
    const auto rep = grid_search(p, base, o);
    CHECK(rep.stage1.size() == 1);
    CHECK(rep.stage1[0].schwarz_weight == 1.0);
    CHECK(rep.stage2.size() == 1);
    CHECK(rep.best.regimes() == 1);
  }
  SUBCASE("two stages") {
    GridSearchOptions o;
    o.regimes = {1, 2};
    o.switch_budgets = {1, 3};
    o.stage2_points = 5;
    const auto rep = grid_search(p, base, o);
    REQUIRE(rep.stage1.size() == 4);
    double total = 0.0;
    for (const auto& c : rep.stage1) {
      CHECK(c.bic >= rep.stage1[rep.stage1_choice].bic);
      total += c.schwarz_weight;
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK(rep.stage1[rep.stage1_choice].regimes == 2);
    REQUIRE(rep.stage2.size() == 6);
    CHECK(rep.stage2[0].l1_bounds.empty());
    CHECK(rep.stage2[0].bic == rep.stage1[rep.stage1_choice].bic);
    for (const auto& c : rep.stage2) CHECK(c.bic >= rep.stage2[rep.stage2_choice].bic);
    CHECK(rep.stage2[rep.stage2_choice].bic <= rep.stage1[rep.stage1_choice].bic);
    CHECK(rep.best.bic == rep.stage2[rep.stage2_choice].bic);
    REQUIRE(rep.k_star.size() == 2);
    for (std::size_t k = 0; k < 2; ++k)
      CHECK(rep.k_star[k] == sparsify(rep.best.lambdas[k]).active_count);
    o.jobs = 3;
    const auto par = grid_search(p, base, o);
    CHECK(par.best.gamma == rep.best.gamma);
    CHECK(par.best.lambdas == rep.best.lambdas);
    CHECK(par.stage2_choice == rep.stage2_choice);
  }
}
