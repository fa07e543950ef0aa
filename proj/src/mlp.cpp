#include "mlpsel/mlp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mlpsel/errors.hpp"

namespace mlpsel {

namespace {

void check_dim(const Theta& theta, std::size_t dim) {
  if (dim != static_cast<std::size_t>(theta.d()))
    throw InvalidInput("input has dimension " + std::to_string(dim) + ", model expects " +
                       std::to_string(theta.d()));
}

void check_data(const Theta& theta, double sigma2, const Dataset& data) {
  if (!(sigma2 > 0.0)) throw InvalidInput("sigma2 must be > 0");
  check_dim(theta, static_cast<std::size_t>(data.d()));
}

double pre_activation(const Theta& theta, int i, std::span<const double> x) {
  double u = theta.b(i);
  const auto w = theta.w_row(i);
  for (std::size_t l = 0; l < x.size(); ++l) u += w[l] * x[l];
  return u;
}

}  // namespace

double mlp_forward(const Theta& theta, const TransferFunction& phi, std::span<const double> x) {
  check_dim(theta, x.size());
  double f = theta.beta();
  for (int i = 0; i < theta.k(); ++i) f += theta.a(i) * phi.value(pre_activation(theta, i, x));
  return f;
}

Eigen::VectorXd mlp_grad_params(const Theta& theta, const TransferFunction& phi,
                                std::span<const double> x) {
  check_dim(theta, x.size());
  Eigen::VectorXd g(static_cast<Eigen::Index>(theta.size()));
  g[0] = 1.0;
  for (int i = 0; i < theta.k(); ++i) {
    double v = 0.0;
    double dv = 0.0;
    phi.value_d1(pre_activation(theta, i, x), v, dv);
    const double slope = theta.a(i) * dv;
    g[static_cast<Eigen::Index>(theta.index_a(i))] = v;
    g[static_cast<Eigen::Index>(theta.index_b(i))] = slope;
    for (int l = 0; l < theta.d(); ++l)
      g[static_cast<Eigen::Index>(theta.index_w(i, l))] = slope * x[static_cast<std::size_t>(l)];
  }
  return g;
}

double cond_loglik(const Theta& theta, const TransferFunction& phi, double sigma2,
                   const Dataset& data) {
  check_data(theta, sigma2, data);
  double sse = 0.0;
  for (std::size_t s = 0; s < data.n(); ++s) {
    const double r = data.y(s) - mlp_forward(theta, phi, data.x(s));
    sse += r * r;
  }
  const double n = static_cast<double>(data.n());
  return -0.5 * n * std::log(2.0 * std::numbers::pi * sigma2) - sse / (2.0 * sigma2);
}

Eigen::VectorXd cond_loglik_grad(const Theta& theta, const TransferFunction& phi, double sigma2,
                                 const Dataset& data) {
  Eigen::VectorXd grad;
  cond_loglik_with_grad(theta, phi, sigma2, data, grad);
  return grad;
}

double cond_loglik_with_grad(const Theta& theta, const TransferFunction& phi, double sigma2,
                             const Dataset& data, Eigen::VectorXd& grad) {
  check_data(theta, sigma2, data);
  const Eigen::Index k = theta.k();
  const Eigen::Index d = theta.d();
  const auto& v = theta.values();
  const Eigen::Map<const RowMatrix> W(v.data() + theta.index_w(0, 0), k, d);
  const auto a = v.segment(1, k);
  const auto b = v.segment(1 + k, k);

  // Column i of U holds the pre-activations of unit i over the sample.
  Eigen::MatrixXd U = data.X() * W.transpose();
  U.rowwise() += b.transpose();
  Eigen::ArrayXXd act;
  Eigen::ArrayXXd dact;
  phi.apply(U.array(), act, dact);

  const Eigen::VectorXd r =
      (data.y() - act.matrix() * a).array() - theta.beta();
  const double sse = r.squaredNorm();

  grad.resize(v.size());
  grad[0] = r.sum();
  grad.segment(1, k) = act.matrix().transpose() * r;
  const Eigen::MatrixXd weighted = (dact.colwise() * r.array()).matrix();
  grad.segment(1 + k, k) = a.cwiseProduct(weighted.colwise().sum().transpose());
  const RowMatrix gw = a.asDiagonal() * (weighted.transpose() * data.X());
  grad.tail(k * d) = Eigen::Map<const Eigen::VectorXd>(gw.data(), k * d);
  grad /= sigma2;

  const double n = static_cast<double>(data.n());
  return -0.5 * n * std::log(2.0 * std::numbers::pi * sigma2) - sse / (2.0 * sigma2);
}

}  // namespace mlpsel
