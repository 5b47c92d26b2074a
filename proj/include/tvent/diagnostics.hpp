#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tvent/estimator.hpp"
#include "tvent/gamma_step.hpp"
#include "tvent/panel.hpp"
#include "tvent/quadrature.hpp"

namespace tvent {

struct SyntheticCase {
  Panel panel;
  AffiliationField gamma_true;  // binary, K = 2
  std::vector<double> v_true;   // variance per t
};

/// Alternating blocks of length switch_period, starting with N(0, 1); the
/// other regime is N(0, v2). Single dimension.
SyntheticCase gen_two_regime_gaussian(double v2, std::size_t length = 1000,
                                      std::size_t switch_period = 250,
                                      std::uint64_t seed = 0);

/// Fraction of mismatched hard labels, minimized over label permutations.
double classification_error(const AffiliationField& truth, const AffiliationField& estimate);

/// ||v_est - v_true||_2 / ||v_true||_2
double relative_error(const std::vector<double>& v_true, const std::vector<double>& v_est);

/// Variance of each regime density, in return units of dimension i.
std::vector<double> regime_variances(const FitResult& fit, const ScalingMap& scaling,
                                     std::size_t i, const QuadratureRule& quad);

/// v_t = sum_k gamma^(k)_{t,i} v^(k) in return units.
std::vector<double> variance_path(const FitResult& fit, const ScalingMap& scaling,
                                  std::size_t i, const QuadratureRule& quad);

/// Centered rolling sample variance (window 2b + 1, truncated at the ends).
std::vector<double> gmw_variance(const std::vector<double>& x, std::size_t bandwidth);

/// Sample autocorrelation of |x_t|^d at lags 1..max_lag.
/// Throws DegenerateSeries when |x|^d is constant.
std::vector<double> acf_abs(const std::vector<double>& x, double d, std::size_t max_lag);

struct AcfBands {
  double iid = 0.0;        // half-width, same for every lag
  std::vector<double> ma;  // Bartlett half-width per lag 1..L
};

AcfBands acf_bands(const std::vector<double>& rho, std::size_t length);

/// Mean ACF of |x|^d over n_samples panels drawn from the fitted model with
/// the regime path held at the fitted affiliation. Points are drawn from the
/// composed density sum_k gamma^(k)_{t,i} lambda^(k) and mapped back to
/// return units of dimension i.
std::vector<double> simulated_acf(const FitResult& fit, const ScalingMap& scaling,
                                  std::size_t i, const QuadratureRule& quad,
                                  std::size_t n_samples, double d, std::size_t max_lag,
                                  std::uint64_t seed, std::size_t jobs = 1);

struct JumpSeries {
  std::vector<std::uint8_t> up;
  std::vector<std::uint8_t> down;
};

/// Jumps of the hard regime path of dimension i, classified by the regime
/// variances.
JumpSeries jump_series(const FitResult& fit, std::size_t i, const QuadratureRule& quad);

struct ContingencyTable2x2 {
  std::uint64_t a = 0, b = 0;  // first row
  std::uint64_t c = 0, d = 0;  // second row
};

/// Two-sided Fisher exact p-value (sum over tables at most as likely).
double fisher_exact(const ContingencyTable2x2& table);

enum class JumpKind { Up, Down };

struct RelationEdge {
  std::size_t source = 0;
  std::size_t target = 0;
  JumpKind source_kind = JumpKind::Up;
  JumpKind target_kind = JumpKind::Up;
  std::size_t lag = 0;
  double p_value = 1.0;
};

struct RelationGraph {
  std::vector<std::string> nodes;
  std::vector<RelationEdge> edges;

  std::string to_json() const;
  std::string to_dot() const;
};

struct TransitionGraphOptions {
  std::size_t max_lag = 5;
  double p_threshold = 0.01;
};

/// For every ordered pair (s, t), s != t, direction pair and lag l, tests the
/// 2x2 co-occurrence of a source jump at time u and a target jump at u + l.
/// Keeps, per (pair, direction pair), the lag with the smallest p-value when
/// it does not exceed the threshold.
RelationGraph transition_graph(const std::vector<std::string>& names,
                               const std::vector<JumpSeries>& jumps,
                               const TransitionGraphOptions& options = {});

/// Treats each dimension of a multivariate fit as one asset.
RelationGraph transition_graph(const FitResult& fit, const std::vector<std::string>& names,
                               const QuadratureRule& quad,
                               const TransitionGraphOptions& options = {});

std::string to_string(JumpKind kind);

}  // namespace tvent
