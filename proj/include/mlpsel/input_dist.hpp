#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mlpsel/theta.hpp"

namespace mlpsel {

enum class InputKind { gaussian, uniform };

/// Distribution q of the inputs X with independent coordinates.
///
/// gaussian: coordinate l ~ N(p1[l], p2[l]^2), positive density on all of R^d.
/// uniform:  coordinate l ~ U(p1[l], p2[l]); density positive only on the box.
/// Both kinds have finite moments of every order.
struct InputDist {
  InputKind kind = InputKind::gaussian;
  std::vector<double> p1{0.0};
  std::vector<double> p2{1.0};

  static InputDist standard_normal(int d) {
    return {InputKind::gaussian, std::vector<double>(static_cast<std::size_t>(d), 0.0),
            std::vector<double>(static_cast<std::size_t>(d), 1.0)};
  }

  int d() const { return static_cast<int>(p1.size()); }
  void validate() const;
  /// False for uniform inputs, whose density vanishes off the box.
  bool positive_everywhere() const { return kind == InputKind::gaussian; }

  void sample(std::mt19937_64& rng, std::span<double> out) const;
  RowMatrix sample(std::mt19937_64& rng, std::size_t n) const;
};

}  // namespace mlpsel
