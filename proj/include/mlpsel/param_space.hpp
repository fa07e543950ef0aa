#pragma once

#include <cstdint>
#include <vector>

#include "mlpsel/theta.hpp"

namespace mlpsel {

/// Compact constraint set for k-unit parameters: every coordinate in
/// [-bound, bound], ||w_i||_2 >= eta, and b_i >= 0 under the sign convention.
struct ThetaSpace {
  int k = 1;
  int d = 1;
  double bound = 10.0;
  double eta = 0.1;
  bool sign_convention = true;

  /// Throws ConfigError when the set is empty or malformed.
  void validate() const;
  bool contains(const Theta& theta, double tol = 0.0) const;

  /// Lower box face for a canonical coordinate (0 for biases under the sign
  /// convention, -bound otherwise); the upper face is always +bound.
  double lower(std::size_t index) const;

  ThetaSpace with_k(int new_k) const {
    ThetaSpace s = *this;
    s.k = new_k;
    return s;
  }
};

/// Clip to the box, push short input-weight vectors radially out to norm eta,
/// and clip biases at zero under the sign convention. Idempotent.
Theta project(const Theta& theta, const ThetaSpace& space);

/// Uniform draw on the box followed by projection.
Theta sample_init(const ThetaSpace& space, std::uint64_t seed);

/// Explicit layout of an overparametrized equivalent of theta0.
struct SplitPlan {
  /// group[i] lists the output-weight proportions for copies of true unit i;
  /// each list is nonempty, entries positive, summing to 1.
  std::vector<std::vector<double>> proportions;
  /// (b, w) locations of extra units carrying a zero output weight.
  std::vector<double> surplus_b;
  std::vector<std::vector<double>> surplus_w;
};

/// Parameter of k units realizing exactly F_{theta0}, laid out by plan.
Theta nonident_witness(const Theta& theta0, const SplitPlan& plan);

/// Random witness in Theta_k: each extra unit either duplicates a true unit
/// (sharing its output weight through random positive proportions) or is a
/// surplus unit with zero output weight at a feasible random location.
Theta nonident_witness(const Theta& theta0, int k, std::uint64_t split_seed,
                       const ThetaSpace& space_hint = {});

}  // namespace mlpsel
