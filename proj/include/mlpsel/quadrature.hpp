#pragma once

#include <vector>

namespace mlpsel {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Hermite rule for the weight exp(-x^2) on the real line.
/// Nodes from the Golub-Welsch eigenproblem, refined by Newton steps on the
/// orthonormal Hermite recurrence; weights from the same recurrence.
QuadratureRule gauss_hermite(int n);

/// Rule for E[g(X)] with X ~ N(mean, sd^2).
QuadratureRule gaussian_expectation_rule(int n, double mean, double sd);

}  // namespace mlpsel
