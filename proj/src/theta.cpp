#include "mlpsel/theta.hpp"

#include <string>

#include "mlpsel/errors.hpp"

namespace mlpsel {

Theta::Theta(int k, int d) : k_(k), d_(d) {
  if (k < 1 || d < 1) throw InvalidInput("Theta requires k >= 1 and d >= 1");
  values_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(param_count(k, d)));
}

Theta::Theta(int k, int d, Eigen::VectorXd values) : k_(k), d_(d), values_(std::move(values)) {
  if (k < 1 || d < 1) throw InvalidInput("Theta requires k >= 1 and d >= 1");
  if (static_cast<std::size_t>(values_.size()) != param_count(k, d))
    throw InvalidInput("Theta: expected " + std::to_string(param_count(k, d)) +
                       " values, got " + std::to_string(values_.size()));
}

Theta Theta::from_parts(double beta, const std::vector<double>& a, const std::vector<double>& b,
                        const std::vector<std::vector<double>>& w) {
  const int k = static_cast<int>(a.size());
  if (k < 1 || b.size() != a.size() || w.size() != a.size())
    throw InvalidInput("Theta::from_parts: a, b and w must have the same nonzero length");
  const int d = static_cast<int>(w.front().size());
  Theta theta(k, d);
  theta.beta() = beta;
  for (int i = 0; i < k; ++i) {
    if (static_cast<int>(w[static_cast<std::size_t>(i)].size()) != d)
      throw InvalidInput("Theta::from_parts: ragged input weights");
    theta.a(i) = a[static_cast<std::size_t>(i)];
    theta.b(i) = b[static_cast<std::size_t>(i)];
    for (int l = 0; l < d; ++l) theta.w(i, l) = w[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
  }
  return theta;
}

Theta Theta::permuted(std::span<const int> order) const {
  if (static_cast<int>(order.size()) != k_) throw InvalidInput("Theta::permuted: bad order length");
  Theta out(k_, d_);
  out.beta() = beta();
  for (int j = 0; j < k_; ++j) {
    const int src = order[static_cast<std::size_t>(j)];
    if (src < 0 || src >= k_) throw InvalidInput("Theta::permuted: index out of range");
    out.a(j) = a(src);
    out.b(j) = b(src);
    for (int l = 0; l < d_; ++l) out.w(j, l) = w(src, l);
  }
  return out;
}

Dataset::Dataset(RowMatrix X, Eigen::VectorXd y) : X_(std::move(X)), y_(std::move(y)) {
  if (y_.size() < 1) throw InvalidInput("Dataset must contain at least one observation");
  if (X_.rows() != y_.size())
    throw InvalidInput("Dataset: X has " + std::to_string(X_.rows()) + " rows but y has " +
                       std::to_string(y_.size()) + " entries");
  if (X_.cols() < 1) throw InvalidInput("Dataset: input dimension must be >= 1");
}

}  // namespace mlpsel
