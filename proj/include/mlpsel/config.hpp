#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mlpsel/input_dist.hpp"
#include "mlpsel/mle.hpp"
#include "mlpsel/param_space.hpp"
#include "mlpsel/selection.hpp"
#include "mlpsel/sim.hpp"
#include "mlpsel/theory.hpp"

namespace mlpsel {

/// Every tunable of the command-line tool in one document. All sections and
/// keys are optional; unknown keys are rejected.
struct RunConfig {
  // "model"
  Theta theta0 = Theta::from_parts(0.0, {2.0}, {0.0}, {{1.5}});
  TransferFunction phi;
  double sigma2 = 0.25;
  // "input"
  InputDist input = InputDist::standard_normal(1);
  // "space"; k and d are filled per use
  ThetaSpace space;
  // "optimizer"
  OptConfig opt;
  // "selection"
  int max_units = 4;
  std::vector<PenaltySpec> penalties{PenaltySpec::bic(), PenaltySpec::aic_like()};
  // "data"
  long long data_n = 500;
  std::uint64_t data_seed = 7;
  // "experiment"
  std::vector<long long> n_grid{100, 500, 2000, 8000};
  int replications = 100;
  std::uint64_t experiment_seed = 2024;
  // "lemma"
  SplitPlan witness{{{0.35, 0.65}}, {0.5}, {{-1.0}}};
  std::vector<double> delta_grid{1e-1, 1e-2, 1e-3};
  std::size_t lemma_n_mc = 200'000;
  std::uint64_t lemma_seed = 3;
  // "ident"
  GramSpec gram;
  // "penalty_check"
  std::vector<long long> h4_n_grid{10, 100, 1000, 10000, 100000, 1000000};
  std::vector<std::pair<int, int>> h4_k_pairs{{2, 1}, {3, 2}, {4, 3}, {4, 1}};
  H4Options h4;

  /// Cross-field checks (dimensions, feasibility, tolerances).
  void validate() const;
  ThetaSpace space_for(int k) const;
  std::vector<ThetaSpace> spaces() const;
  ExperimentConfig experiment() const;
  RatioContext ratio_context() const { return {theta0, phi, sigma2}; }
};

/// Parses and validates a config document. Errors are ConfigError with the
/// offending key path and line number.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace mlpsel
