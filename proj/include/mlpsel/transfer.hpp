#pragma once

#include <string>
#include <string_view>

#include <Eigen/Core>

namespace mlpsel {

enum class TransferKind { tanh, logistic };

/// Bounded transfer function with bounded derivatives up to third order.
class TransferFunction {
 public:
  constexpr TransferFunction() = default;
  constexpr explicit TransferFunction(TransferKind kind) : kind_(kind) {}

  static TransferFunction parse(std::string_view name);

  TransferKind kind() const { return kind_; }
  std::string name() const;

  double value(double u) const;
  double d1(double u) const;
  double d2(double u) const;
  double d3(double u) const;

  /// Value and first derivative from a single transcendental evaluation.
  void value_d1(double u, double& value, double& d1) const;

  /// Elementwise value and first derivative over an array of
  /// pre-activations; agrees with value()/d1() to a few ulps.
  void apply(const Eigen::ArrayXXd& u, Eigen::ArrayXXd& value, Eigen::ArrayXXd& d1) const;

  /// Bound on max(|phi|, |phi'|, |phi''|, |phi'''|) over the real line.
  double derivative_bound() const;

 private:
  TransferKind kind_ = TransferKind::tanh;
};

}  // namespace mlpsel
