#include "tvent/maxent_density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tvent/error.hpp"

namespace tvent {

namespace {

constexpr std::size_t kCdfPanels = 1024;
constexpr double kPanelWidth = 2.0 / static_cast<double>(kCdfPanels);

const QuadratureRule& panel_rule() {
  static const QuadratureRule rule(10);
  return rule;
}

double panel_left(std::size_t p) {
  return -1.0 + kPanelWidth * static_cast<double>(p);
}

}  // namespace

LambdaVector::LambdaVector(std::vector<double> coefficients)
    : coef_(std::move(coefficients)) {
  if (coef_.empty() || coef_.size() > kMaxMomentOrder)
    throw DomainError("moment order must be between 1 and " +
                      std::to_string(kMaxMomentOrder));
  for (double c : coef_)
    if (!std::isfinite(c)) throw DomainError("lambda coefficients must be finite");
}

LambdaVector LambdaVector::zeros(std::size_t m) {
  return LambdaVector(std::vector<double>(m, 0.0));
}

double LambdaVector::l1_norm() const noexcept {
  double s = 0.0;
  for (double c : coef_) s += std::abs(c);
  return s;
}

double LambdaVector::polynomial(double x) const noexcept {
  return monomial_sum(coef_, x);
}

double monomial_sum(std::span<const double> c, double x) noexcept {
  double acc = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) acc = (acc + c[j]) * x;
  return acc;
}

double log_partition(std::span<const double> lambda, const QuadratureRule& quad) {
  const auto& x = quad.nodes();
  const auto& w = quad.weights();
  double smax = -std::numeric_limits<double>::infinity();
  for (double xi : x) smax = std::max(smax, -monomial_sum(lambda, xi));
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    sum += w[i] * std::exp(-monomial_sum(lambda, x[i]) - smax);
  return smax + std::log(sum);
}

double log_partition(const LambdaVector& lambda, const QuadratureRule& quad) {
  return log_partition(lambda.span(), quad);
}

double log_partition_and_moments(std::span<const double> lambda,
                                 const QuadratureRule& quad,
                                 std::span<double> moments_out) {
  const auto& x = quad.nodes();
  const auto& w = quad.weights();
  const std::size_t q = x.size();
  thread_local std::vector<double> s;
  s.resize(q);
  double smax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q; ++i) {
    s[i] = -monomial_sum(lambda, x[i]);
    smax = std::max(smax, s[i]);
  }
  std::fill(moments_out.begin(), moments_out.end(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    const double mass = w[i] * std::exp(s[i] - smax);
    sum += mass;
    double p = mass;
    for (double& mom : moments_out) {
      p *= x[i];
      mom += p;
    }
  }
  for (double& mom : moments_out) mom /= sum;
  return smax + std::log(sum);
}

double density(const LambdaVector& lambda, double x, const QuadratureRule& quad) {
  if (!(x >= -1.0 && x <= 1.0)) throw DomainError("density argument outside [-1, 1]");
  return std::exp(-lambda.polynomial(x) - log_partition(lambda, quad));
}

std::vector<double> moments(const LambdaVector& lambda, const QuadratureRule& quad,
                            std::size_t j_max) {
  if (j_max < 1) throw DomainError("j_max must be at least 1");
  std::vector<double> out(j_max);
  log_partition_and_moments(lambda.span(), quad, out);
  return out;
}

double entropy(const LambdaVector& lambda, const QuadratureRule& quad) {
  std::vector<double> mom(lambda.order());
  const double log_z = log_partition_and_moments(lambda.span(), quad, mom);
  double h = log_z;
  for (std::size_t j = 0; j < mom.size(); ++j) h += lambda[j] * mom[j];
  return h;
}

MaxEntDistribution::MaxEntDistribution(LambdaVector lambda, const QuadratureRule& quad)
    : lambda_(std::move(lambda)), log_z_(0.0) {
  double mom[2];
  log_z_ = log_partition_and_moments(lambda_.span(), quad, mom);
  mean_ = mom[0];
  variance_ = std::max(0.0, mom[1] - mom[0] * mom[0]);
  cumulative_.assign(kCdfPanels + 1, 0.0);
  for (std::size_t p = 0; p < kCdfPanels; ++p)
    cumulative_[p + 1] = cumulative_[p] + panel_integral(p, panel_left(p + 1));
}

double MaxEntDistribution::log_density(double x) const {
  if (!(x >= -1.0 && x <= 1.0)) throw DomainError("density argument outside [-1, 1]");
  return -lambda_.polynomial(x) - log_z_;
}

double MaxEntDistribution::density(double x) const { return std::exp(log_density(x)); }

double MaxEntDistribution::panel_integral(std::size_t panel, double upper) const {
  const double lo = panel_left(panel);
  const double half = 0.5 * (upper - lo);
  if (half <= 0.0) return 0.0;
  const double mid = lo + half;
  const auto& rule = panel_rule();
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.order(); ++k) {
    const double xk = mid + half * rule.nodes()[k];
    acc += rule.weights()[k] * std::exp(-lambda_.polynomial(xk) - log_z_);
  }
  return half * acc;
}

double MaxEntDistribution::cdf(double x) const {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  auto p = static_cast<std::size_t>((x + 1.0) / kPanelWidth);
  p = std::min(p, kCdfPanels - 1);
  const double value = (cumulative_[p] + panel_integral(p, x)) / cumulative_.back();
  return std::clamp(value, 0.0, 1.0);
}

double MaxEntDistribution::solve_in_panel(std::size_t panel, double target) const {
  double lo = panel_left(panel);
  double hi = panel_left(panel + 1);
  const double mass = cumulative_[panel + 1] - cumulative_[panel];
  double x = lo + std::clamp(target / mass, 0.0, 1.0) * (hi - lo);
  for (int iter = 0; iter < 200; ++iter) {
    const double g = panel_integral(panel, x) - target;
    if (g == 0.0) return x;
    if (g > 0.0) hi = x;
    else lo = x;
    const double f = std::exp(-lambda_.polynomial(x) - log_z_);
    double next = f > 0.0 ? x - g / f : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 || hi - lo <= 1e-15) return next;
    x = next;
  }
  throw ConvergenceError("quantile search did not converge in 200 iterations");
}

double MaxEntDistribution::quantile(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  return draw(alpha);
}

double MaxEntDistribution::draw(double u) const {
  const double target = u * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  std::size_t p = it == cumulative_.begin()
                      ? 0
                      : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  p = std::min(p, kCdfPanels - 1);
  return solve_in_panel(p, target - cumulative_[p]);
}

std::vector<double> MaxEntDistribution::sample(std::size_t count,
                                               std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<double> out(count);
  for (auto& v : out) v = draw(unit_uniform(rng()));
  return out;
}

double cdf(const LambdaVector& lambda, double x, const QuadratureRule& quad) {
  return MaxEntDistribution(lambda, quad).cdf(x);
}

double quantile(const LambdaVector& lambda, double alpha, const QuadratureRule& quad) {
  return MaxEntDistribution(lambda, quad).quantile(alpha);
}

std::vector<double> sample(const LambdaVector& lambda, std::size_t count,
                           std::uint64_t seed, const QuadratureRule& quad) {
  return MaxEntDistribution(lambda, quad).sample(count, seed);
}

}  // namespace tvent
