#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mlpsel {

/// Parameter vector of a one-hidden-layer MLP with k hidden units on R^d.
///
/// Values are stored flat in the canonical order
///   (beta, a_1..a_k, b_1..b_k, w_11..w_1d, ..., w_k1..w_kd)
/// which every gradient, optimizer and serializer in the library uses.
class Theta {
 public:
  Theta() = default;
  /// All-zero parameter.
  Theta(int k, int d);
  /// Takes ownership of a flat vector in canonical order.
  Theta(int k, int d, Eigen::VectorXd values);

  static Theta from_parts(double beta, const std::vector<double>& a,
                          const std::vector<double>& b,
                          const std::vector<std::vector<double>>& w);

  static std::size_t param_count(int k, int d) {
    return static_cast<std::size_t>(2 * k + 1 + k * d);
  }

  int k() const { return k_; }
  int d() const { return d_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  std::size_t index_beta() const { return 0; }
  std::size_t index_a(int i) const { return static_cast<std::size_t>(1 + i); }
  std::size_t index_b(int i) const { return static_cast<std::size_t>(1 + k_ + i); }
  std::size_t index_w(int i, int l) const {
    return static_cast<std::size_t>(1 + 2 * k_ + i * d_ + l);
  }

  double beta() const { return values_[0]; }
  double& beta() { return values_[0]; }
  double a(int i) const { return values_[index_a(i)]; }
  double& a(int i) { return values_[index_a(i)]; }
  double b(int i) const { return values_[index_b(i)]; }
  double& b(int i) { return values_[index_b(i)]; }
  double w(int i, int l) const { return values_[index_w(i, l)]; }
  double& w(int i, int l) { return values_[index_w(i, l)]; }

  std::span<const double> w_row(int i) const {
    return {values_.data() + index_w(i, 0), static_cast<std::size_t>(d_)};
  }
  std::span<double> w_row(int i) {
    return {values_.data() + index_w(i, 0), static_cast<std::size_t>(d_)};
  }

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  /// Copy with hidden units reordered: unit j of the result is unit order[j].
  Theta permuted(std::span<const int> order) const;

  bool operator==(const Theta& other) const {
    return k_ == other.k_ && d_ == other.d_ && values_ == other.values_;
  }

 private:
  int k_ = 0;
  int d_ = 0;
  Eigen::VectorXd values_;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n observations (x_i, y_i) with x_i in R^d.
class Dataset {
 public:
  Dataset() = default;
  Dataset(RowMatrix X, Eigen::VectorXd y);

  std::size_t n() const { return static_cast<std::size_t>(y_.size()); }
  int d() const { return static_cast<int>(X_.cols()); }

  std::span<const double> x(std::size_t i) const {
    return {X_.data() + i * static_cast<std::size_t>(X_.cols()),
            static_cast<std::size_t>(X_.cols())};
  }
  double y(std::size_t i) const { return y_[static_cast<Eigen::Index>(i)]; }

  const RowMatrix& X() const { return X_; }
  const Eigen::VectorXd& y() const { return y_; }

 private:
  RowMatrix X_;
  Eigen::VectorXd y_;
};

}  // namespace mlpsel
