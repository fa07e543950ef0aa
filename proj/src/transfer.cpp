#include "mlpsel/transfer.hpp"

#include <cmath>

#include "mlpsel/errors.hpp"

namespace mlpsel {

namespace {

double logistic(double u) {
  // Branches keep exp() from overflowing for large |u|.
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

TransferFunction TransferFunction::parse(std::string_view name) {
  if (name == "tanh") return TransferFunction(TransferKind::tanh);
  if (name == "logistic" || name == "logistic-sigmoid" || name == "sigmoid")
    return TransferFunction(TransferKind::logistic);
  throw InvalidInput("unknown transfer function '" + std::string(name) + "'");
}

std::string TransferFunction::name() const {
  return kind_ == TransferKind::tanh ? "tanh" : "logistic";
}

double TransferFunction::value(double u) const {
  return kind_ == TransferKind::tanh ? std::tanh(u) : logistic(u);
}

double TransferFunction::d1(double u) const {
  if (kind_ == TransferKind::tanh) {
    const double t = std::tanh(u);
    return 1.0 - t * t;
  }
  const double s = logistic(u);
  return s * (1.0 - s);
}

double TransferFunction::d2(double u) const {
  if (kind_ == TransferKind::tanh) {
    const double t = std::tanh(u);
    return -2.0 * t * (1.0 - t * t);
  }
  const double s = logistic(u);
  return s * (1.0 - s) * (1.0 - 2.0 * s);
}

double TransferFunction::d3(double u) const {
  if (kind_ == TransferKind::tanh) {
    const double t = std::tanh(u);
    return -2.0 * (1.0 - t * t) * (1.0 - 3.0 * t * t);
  }
  const double s = logistic(u);
  return s * (1.0 - s) * (1.0 - 6.0 * s + 6.0 * s * s);
}

void TransferFunction::value_d1(double u, double& v, double& dv) const {
  if (kind_ == TransferKind::tanh) {
    v = std::tanh(u);
    dv = 1.0 - v * v;
  } else {
    v = logistic(u);
    dv = v * (1.0 - v);
  }
}

void TransferFunction::apply(const Eigen::ArrayXXd& u, Eigen::ArrayXXd& v,
                             Eigen::ArrayXXd& dv) const {
  // exp() vectorizes where tanh() does not; exp overflow to inf yields the
  // correct saturated limits.
  if (kind_ == TransferKind::tanh) {
    v = 1.0 - 2.0 / ((2.0 * u).exp() + 1.0);
    dv = 1.0 - v.square();
  } else {
    v = 1.0 / (1.0 + (-u).exp());
    dv = v * (1.0 - v);
  }
}

double TransferFunction::derivative_bound() const {
  // tanh: |phi'''| peaks at 2 (u = 0); logistic: every derivative is <= 1.
  return kind_ == TransferKind::tanh ? 2.0 : 1.0;
}

}  // namespace mlpsel
