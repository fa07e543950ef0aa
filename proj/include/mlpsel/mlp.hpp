#pragma once

#include <span>

#include <Eigen/Dense>

#include "mlpsel/theta.hpp"
#include "mlpsel/transfer.hpp"

namespace mlpsel {

/// F_theta(x) = beta + sum_i a_i phi(b_i + w_i^T x).
double mlp_forward(const Theta& theta, const TransferFunction& phi, std::span<const double> x);

/// dF_theta(x)/dtheta in canonical order.
Eigen::VectorXd mlp_grad_params(const Theta& theta, const TransferFunction& phi,
                                std::span<const double> x);

/// Gaussian conditional log-likelihood sum_i log N(y_i; F_theta(x_i), sigma2).
/// The input density q(x) is omitted; it does not depend on theta.
double cond_loglik(const Theta& theta, const TransferFunction& phi, double sigma2,
                   const Dataset& data);

/// Gradient of cond_loglik in canonical order.
Eigen::VectorXd cond_loglik_grad(const Theta& theta, const TransferFunction& phi, double sigma2,
                                 const Dataset& data);

/// Log-likelihood and its gradient in one pass over the data.
double cond_loglik_with_grad(const Theta& theta, const TransferFunction& phi, double sigma2,
                             const Dataset& data, Eigen::VectorXd& grad);

}  // namespace mlpsel
