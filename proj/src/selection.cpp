#include "mlpsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mlpsel/errors.hpp"
#include "mlpsel/theta.hpp"

namespace mlpsel {

void PenaltySpec::validate() const {
  if (kind != PenaltyKind::custom) return;
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("custom penalty: c must be > 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw ConfigError("custom penalty: alpha must be >= 0");
}

std::string PenaltySpec::name() const {
  switch (kind) {
    case PenaltyKind::bic:
      return "bic";
    case PenaltyKind::aic_like:
      return "aic_like";
    case PenaltyKind::custom: {
      std::ostringstream os;
      os << "custom(c=" << c << ",alpha=" << alpha << ")";
      return os.str();
    }
  }
  return "unknown";
}

double penalty_eval(const PenaltySpec& spec, long long n, int k, int d) {
  spec.validate();
  if (n < 1 || k < 1 || d < 1) throw InvalidInput("penalty_eval: n, k and d must be >= 1");
  const double dim = static_cast<double>(Theta::param_count(k, d));
  switch (spec.kind) {
    case PenaltyKind::bic:
      return 0.5 * dim * std::log(static_cast<double>(n));
    case PenaltyKind::aic_like:
      return dim;
    case PenaltyKind::custom:
      return spec.c * dim * std::pow(static_cast<double>(n), spec.alpha);
  }
  return 0.0;
}

SelectionResult select(const std::vector<double>& logliks, const PenaltySpec& spec, long long n,
                       int d) {
  if (logliks.empty()) throw InvalidInput("select: empty profile");
  SelectionResult out;
  out.penalty = spec;
  out.n = n;
  out.d = d;
  double best = 0.0;
  for (std::size_t m = 0; m < logliks.size(); ++m) {
    SelectionRow row;
    row.k = static_cast<int>(m) + 1;
    row.loglik = logliks[m];
    row.penalty = penalty_eval(spec, n, row.k, d);
    row.criterion = row.loglik - row.penalty;
    if (out.k_hat == 0 || row.criterion > best) {
      best = row.criterion;
      out.k_hat = row.k;
    }
    out.table.push_back(row);
  }
  return out;
}

SelectionResult select(const std::vector<FitResult>& profile, const PenaltySpec& spec,
                       long long n, int d) {
  if (profile.empty()) throw InvalidInput("select: empty profile");
  // Entries may arrive in any order; they must cover k = 1..M exactly once.
  std::vector<double> logliks(profile.size(), 0.0);
  std::vector<bool> seen(profile.size(), false);
  for (const auto& fr : profile) {
    if (fr.k < 1 || fr.k > static_cast<int>(profile.size()) ||
        seen[static_cast<std::size_t>(fr.k - 1)])
      throw InvalidInput("select: profile must hold one entry per k = 1..M");
    seen[static_cast<std::size_t>(fr.k - 1)] = true;
    logliks[static_cast<std::size_t>(fr.k - 1)] = fr.loglik;
  }
  return select(logliks, spec, n, d);
}

H4Report check_H4(const PenaltySpec& spec, int d, const std::vector<std::pair<int, int>>& k_pairs,
                  const std::vector<long long>& n_grid, const H4Options& options) {
  spec.validate();
  if (n_grid.size() < 4) throw InvalidInput("check_H4: n_grid needs at least 4 points");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1]) throw InvalidInput("check_H4: n_grid must be increasing");
  if (n_grid.front() < 1) throw InvalidInput("check_H4: n_grid entries must be >= 1");
  if (static_cast<double>(n_grid.back()) < 1000.0 * static_cast<double>(n_grid.front()))
    throw InvalidInput("check_H4: n_grid must span at least 3 decades");
  if (k_pairs.empty()) throw InvalidInput("check_H4: need at least one (k1, k2) pair");
  int k_max = 1;
  for (const auto& [k1, k2] : k_pairs) {
    if (k2 < 1 || k1 <= k2) throw InvalidInput("check_H4: pairs must satisfy k1 > k2 >= 1");
    k_max = std::max(k_max, k1);
  }

  H4Report rep;
  rep.penalty = spec.name();

  rep.monotone.name = "monotone_in_k";
  rep.monotone.passed = true;
  for (long long n : n_grid) {
    for (int k = 1; k < k_max && rep.monotone.passed; ++k) {
      if (penalty_eval(spec, n, k + 1, d) < penalty_eval(spec, n, k, d)) {
        rep.monotone.passed = false;
        rep.monotone.detail = "p_n(" + std::to_string(k + 1) + ") < p_n(" + std::to_string(k) +
                              ") at n = " + std::to_string(n);
      }
    }
  }

  rep.divergence.name = "gap_diverges";
  rep.divergence.heuristic = true;
  rep.divergence.passed = true;
  for (const auto& [k1, k2] : k_pairs) {
    double prev = 0.0;
    for (std::size_t i = 0; i < n_grid.size() && rep.divergence.passed; ++i) {
      const double gap = penalty_eval(spec, n_grid[i], k1, d) - penalty_eval(spec, n_grid[i], k2, d);
      if (i > 0 && !(gap > prev)) {
        rep.divergence.passed = false;
        rep.divergence.detail = "gap p_n(" + std::to_string(k1) + ") - p_n(" + std::to_string(k2) +
                                ") not increasing at n = " + std::to_string(n_grid[i]);
      } else if (i + 1 == n_grid.size() && !(gap > options.gap_threshold)) {
        rep.divergence.passed = false;
        rep.divergence.detail = "gap " + std::to_string(gap) + " below threshold " +
                                std::to_string(options.gap_threshold) + " at largest n";
      }
      prev = gap;
    }
  }

  rep.sublinear.name = "ratio_to_zero";
  rep.sublinear.heuristic = true;
  rep.sublinear.passed = true;
  for (int k = 1; k <= k_max && rep.sublinear.passed; ++k) {
    double prev = 0.0;
    double first = 0.0;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      const double ratio = penalty_eval(spec, n_grid[i], k, d) / static_cast<double>(n_grid[i]);
      if (i == 0) {
        first = ratio;
      } else if (!(ratio < prev)) {
        rep.sublinear.passed = false;
        rep.sublinear.detail = "p_n(" + std::to_string(k) + ")/n not decreasing at n = " +
                               std::to_string(n_grid[i]);
        break;
      }
      if (i + 1 == n_grid.size() && !(ratio <= options.ratio_shrink * first)) {
        rep.sublinear.passed = false;
        rep.sublinear.detail = "p_n(" + std::to_string(k) + ")/n shrinks too slowly";
      }
      prev = ratio;
    }
  }

  rep.passed = rep.monotone.passed && rep.divergence.passed && rep.sublinear.passed;
  return rep;
}

}  // namespace mlpsel
