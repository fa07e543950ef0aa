#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mlpsel/mle.hpp"

namespace mlpsel {

enum class PenaltyKind { bic, aic_like, custom };

/// p_n(k) as a function of the parameter count dim(k) = 2k + 1 + k d:
///   bic      -> dim(k)/2 * ln n
///   aic_like -> dim(k)
///   custom   -> c * dim(k) * n^alpha
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::bic;
  double c = 1.0;
  double alpha = 0.5;

  static PenaltySpec bic() { return {PenaltyKind::bic, 1.0, 0.0}; }
  static PenaltySpec aic_like() { return {PenaltyKind::aic_like, 1.0, 0.0}; }
  static PenaltySpec custom(double c, double alpha) { return {PenaltyKind::custom, c, alpha}; }

  void validate() const;
  /// "bic", "aic_like" or "custom(c=...,alpha=...)".
  std::string name() const;
};

double penalty_eval(const PenaltySpec& spec, long long n, int k, int d);

struct SelectionRow {
  int k = 0;
  double loglik = 0.0;
  double penalty = 0.0;
  double criterion = 0.0;
};

struct SelectionResult {
  int k_hat = 0;
  std::vector<SelectionRow> table;
  PenaltySpec penalty;
  long long n = 0;
  int d = 0;
};

/// k_hat = argmax_k T_n(k) = max l_n - p_n(k); ties go to the smaller k.
SelectionResult select(const std::vector<FitResult>& profile, const PenaltySpec& spec,
                       long long n, int d);

/// Same, from bare maximized log-likelihoods indexed by k - 1.
SelectionResult select(const std::vector<double>& logliks, const PenaltySpec& spec, long long n,
                       int d);

struct ConditionCheck {
  std::string name;
  bool passed = false;
  bool heuristic = false;
  std::string detail;
};

struct H4Report {
  std::string penalty;
  ConditionCheck monotone;
  ConditionCheck divergence;
  ConditionCheck sublinear;
  bool passed = false;
};

struct H4Options {
  /// Every gap p_n(k1) - p_n(k2) must exceed this at the largest n.
  double gap_threshold = 10.0;
  /// p_n(k)/n at the largest n must be at most this fraction of its value at
  /// the smallest n.
  double ratio_shrink = 0.5;
};

/// Finite-grid check of the penalty conditions: increasing in k, diverging
/// gaps between any k1 > k2, and p_n(k)/n -> 0. The last two are trend checks
/// on n_grid and are reported as heuristic.
H4Report check_H4(const PenaltySpec& spec, int d, const std::vector<std::pair<int, int>>& k_pairs,
                  const std::vector<long long>& n_grid, const H4Options& options = {});

}  // namespace mlpsel
