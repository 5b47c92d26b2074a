#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tvent/quadrature.hpp"

namespace tvent {

inline constexpr std::size_t kMaxMomentOrder = 12;

/// Coefficients lambda_1..lambda_m of the density exp(-sum_j lambda_j x^j) / Z
/// on [-1, 1]. lambda_0 is not stored; it is ln Z.
class LambdaVector {
 public:
  /// Throws DomainError unless 1 <= m <= kMaxMomentOrder and all finite.
  explicit LambdaVector(std::vector<double> coefficients);
  static LambdaVector zeros(std::size_t m);

  std::size_t order() const noexcept { return coef_.size(); }
  /// 0-based: operator[](j) is lambda_{j+1}.
  double operator[](std::size_t j) const { return coef_.at(j); }
  const std::vector<double>& coefficients() const noexcept { return coef_; }
  std::span<const double> span() const noexcept { return coef_; }

  double l1_norm() const noexcept;
  /// sum_j lambda_j x^j
  double polynomial(double x) const noexcept;

  friend bool operator==(const LambdaVector&, const LambdaVector&) = default;

 private:
  std::vector<double> coef_;
};

/// sum_{j=1..m} c_j x^j by Horner's rule.
double monomial_sum(std::span<const double> c, double x) noexcept;

/// ln of the integral over [-1, 1] of exp(-sum_j lambda_j x^j), evaluated in
/// the log domain with a max-exponent shift.
double log_partition(std::span<const double> lambda, const QuadratureRule& quad);
double log_partition(const LambdaVector& lambda, const QuadratureRule& quad);

/// Computes ln Z and E[X^j] for j = 1..moments_out.size() in one pass.
double log_partition_and_moments(std::span<const double> lambda,
                                 const QuadratureRule& quad,
                                 std::span<double> moments_out);

/// Normalized density at x in [-1, 1]; DomainError outside.
double density(const LambdaVector& lambda, double x, const QuadratureRule& quad);

/// E[X^j] for j = 1..j_max.
std::vector<double> moments(const LambdaVector& lambda, const QuadratureRule& quad,
                            std::size_t j_max);

/// Differential entropy -int f ln f = sum_j lambda_j E[X^j] + ln Z.
double entropy(const LambdaVector& lambda, const QuadratureRule& quad);

/// A single MaxEnt density with a tabulated CDF for cdf/quantile/sampling.
///
/// The CDF is accumulated over 1024 equal panels with a 10-point
/// Gauss-Legendre rule per panel; inside a panel it is integrated on demand.
class MaxEntDistribution {
 public:
  MaxEntDistribution(LambdaVector lambda, const QuadratureRule& quad);

  const LambdaVector& lambda() const noexcept { return lambda_; }
  double log_z() const noexcept { return log_z_; }

  double density(double x) const;
  double log_density(double x) const;
  double cdf(double x) const;
  /// Throws DomainError unless 0 < alpha < 1; ConvergenceError if the panel
  /// search does not terminate within 200 iterations.
  double quantile(double alpha) const;
  /// Inverse-CDF draws on uniforms from a seeded mt19937_64.
  std::vector<double> sample(std::size_t count, std::uint64_t seed) const;
  /// Inverse-CDF draw for a given uniform u in (0, 1).
  double draw(double u) const;

  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }

 private:
  double panel_integral(std::size_t panel, double upper) const;
  double solve_in_panel(std::size_t panel, double target) const;

  LambdaVector lambda_;
  double log_z_;
  double mean_ = 0.0;
  double variance_ = 0.0;
  std::vector<double> cumulative_;  // unnormalized, size panels+1
};

double cdf(const LambdaVector& lambda, double x, const QuadratureRule& quad);
double quantile(const LambdaVector& lambda, double alpha, const QuadratureRule& quad);
std::vector<double> sample(const LambdaVector& lambda, std::size_t count,
                           std::uint64_t seed, const QuadratureRule& quad);

/// Uniform variate in (0, 1) from 53 random bits.
inline double unit_uniform(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace tvent
