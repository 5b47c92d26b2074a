#pragma once

#include <cstddef>
#include <vector>

namespace tvent {

/// Gauss-Legendre rule on [-1, 1].
class QuadratureRule {
 public:
  /// Throws DomainError for order < 1.
  explicit QuadratureRule(std::size_t order = 200);

  std::size_t order() const noexcept { return nodes_.size(); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

}  // namespace tvent
