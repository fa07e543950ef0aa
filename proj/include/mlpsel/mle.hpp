#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mlpsel/param_space.hpp"
#include "mlpsel/theta.hpp"
#include "mlpsel/transfer.hpp"

namespace mlpsel {

struct OptConfig {
  int n_starts = 20;
  int max_iters = 500;
  /// Sup-norm of the projected gradient of -l_n/n.
  double grad_tol = 1e-6;
  /// Sup-norm of an accepted step.
  double step_tol = 1e-10;
  std::uint64_t base_seed = 1;
  /// Random starts are drawn by sample_init on the space with its bound
  /// reduced to min(bound, init_bound); 0 uses the full box. Ascents always
  /// run on the full space.
  double init_bound = 3.0;

  void validate() const;
};

struct StartRecord {
  std::uint64_t seed = 0;
  bool warm = false;
  bool converged = false;
  bool failed = false;
  int iterations = 0;
  double loglik = 0.0;
};

struct FitResult {
  int k = 0;
  double loglik = 0.0;
  Theta theta_hat;
  int n_starts_used = 0;
  /// Index into starts of the winning start.
  int best_start = 0;
  std::vector<StartRecord> starts;
};

/// max{ l_n(theta) : theta in Theta_k } by multi-start projected BFGS.
///
/// Start s is initialized by sample_init(start_space(space, cfg), base_seed + s); extra_starts
/// are appended after the random ones. Ties go to the lowest start index.
FitResult fit(const Dataset& data, const ThetaSpace& space, const TransferFunction& phi,
              double sigma2, const OptConfig& cfg, const std::vector<Theta>& extra_starts = {});

/// Space random starts are drawn from (see OptConfig::init_bound).
ThetaSpace start_space(const ThetaSpace& space, const OptConfig& cfg);

/// fit for k = 1..M. For k >= 2 the (k-1)-solution padded with one unit of
/// zero output weight is tried as one additional start.
std::vector<FitResult> profile_fit(const Dataset& data, const std::vector<ThetaSpace>& spaces,
                                   const TransferFunction& phi, double sigma2,
                                   const OptConfig& cfg);

/// Append a unit with a = 0 and a feasible random (b, w) location.
Theta embed_with_extra_unit(const Theta& theta, const ThetaSpace& target_space,
                            std::uint64_t seed);

/// Outcome of a single projected ascent, exposed for diagnostics and tests.
struct AscentTrace {
  Theta theta;
  double loglik = 0.0;
  bool converged = false;
  bool failed = false;
  int iterations = 0;
  /// l_n after each accepted step (only filled when requested).
  std::vector<double> history;
};

AscentTrace projected_ascent(const Dataset& data, const ThetaSpace& space,
                             const TransferFunction& phi, double sigma2, const OptConfig& cfg,
                             const Theta& start, bool record_history = false);

}  // namespace mlpsel
