#pragma once

#include <vector>

namespace qgamp {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Physicists' Gauss-Hermite rule: sum_i w_i f(x_i) ~ int f(x) exp(-x^2) dx.
/// E[g(Z)] for Z ~ N(0, s^2) is (1/sqrt(pi)) sum_i w_i g(sqrt(2) s x_i).
QuadratureRule gauss_hermite(int n);

/// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

}  // namespace qgamp
