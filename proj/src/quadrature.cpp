#include "mlpsel/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "mlpsel/errors.hpp"

namespace mlpsel {

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw InvalidInput("gauss_hermite: need at least one node");
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd sub(std::max<Eigen::Index>(N - 1, 1));
  for (Eigen::Index i = 1; i < N; ++i) sub[i - 1] = std::sqrt(static_cast<double>(i) / 2.0);

  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = std::sqrt(std::numbers::pi);
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub.head(N - 1), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& guess = solver.eigenvalues();

  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  for (int i = 0; i < n; ++i) {
    double z = guess[i];
    double pp = 0.0;
    for (int it = 0; it < 10; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = z;
    // pp overflows to inf only where the true weight underflows anyway.
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / (pp * pp);
  }
  return rule;
}

QuadratureRule gaussian_expectation_rule(int n, double mean, double sd) {
  if (!(sd > 0.0)) throw InvalidInput("gaussian_expectation_rule: sd must be > 0");
  QuadratureRule rule = gauss_hermite(n);
  const double scale = std::sqrt(2.0) * sd;
  const double norm = 1.0 / std::sqrt(std::numbers::pi);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] = mean + scale * rule.nodes[i];
    rule.weights[i] *= norm;
  }
  return rule;
}

}  // namespace mlpsel
