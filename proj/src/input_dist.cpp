#include "mlpsel/input_dist.hpp"

#include <cmath>

#include "mlpsel/errors.hpp"

namespace mlpsel {

void InputDist::validate() const {
  if (p1.empty() || p1.size() != p2.size())
    throw ConfigError("InputDist: parameter vectors must be nonempty and of equal length");
  for (std::size_t l = 0; l < p1.size(); ++l) {
    if (!std::isfinite(p1[l]) || !std::isfinite(p2[l]))
      throw ConfigError("InputDist: parameters must be finite");
    if (kind == InputKind::gaussian && !(p2[l] > 0.0))
      throw ConfigError("InputDist: gaussian sd must be > 0");
    if (kind == InputKind::uniform && !(p2[l] > p1[l]))
      throw ConfigError("InputDist: uniform requires lo < hi");
  }
}

void InputDist::sample(std::mt19937_64& rng, std::span<double> out) const {
  if (out.size() != p1.size()) throw InvalidInput("InputDist::sample: dimension mismatch");
  for (std::size_t l = 0; l < out.size(); ++l) {
    if (kind == InputKind::gaussian) {
      std::normal_distribution<double> dist(p1[l], p2[l]);
      out[l] = dist(rng);
    } else {
      std::uniform_real_distribution<double> dist(p1[l], p2[l]);
      out[l] = dist(rng);
    }
  }
}

RowMatrix InputDist::sample(std::mt19937_64& rng, std::size_t n) const {
  RowMatrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p1.size()));
  for (std::size_t i = 0; i < n; ++i)
    sample(rng, {X.data() + i * p1.size(), p1.size()});
  return X;
}

}  // namespace mlpsel
