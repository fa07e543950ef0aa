#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlpsel/input_dist.hpp"
#include "mlpsel/mle.hpp"
#include "mlpsel/selection.hpp"

namespace mlpsel {

/// x_i ~ dist, y_i = F_{theta0}(x_i) + eps_i with eps_i ~ N(0, sigma2).
Dataset generate(const Theta& theta0, const TransferFunction& phi, double sigma2,
                 const InputDist& dist, std::size_t n, std::uint64_t seed);

struct ExperimentConfig {
  Theta theta0;
  double sigma2 = 0.25;
  TransferFunction phi;
  InputDist input;
  std::vector<long long> n_grid;
  int replications = 100;
  /// Largest number of hidden units fitted.
  int max_units = 4;
  std::vector<PenaltySpec> penalties{PenaltySpec::bic()};
  OptConfig opt;
  /// Shape of every Theta_k; its k is overwritten per fit.
  ThetaSpace space;
  std::uint64_t base_seed = 1;

  void validate() const;
};

struct ReplicationRecord {
  long long n = 0;
  int replication = 0;
  std::uint64_t data_seed = 0;
  bool failed = false;
  std::string error;
  /// Maximized log-likelihood for k = 1..M.
  std::vector<double> logliks;
  /// Selected k per penalty, in cfg.penalties order.
  std::vector<int> k_hat;
};

struct CellCounts {
  std::string penalty;
  long long n = 0;
  /// counts[k - 1] = #{replications with k_hat = k}.
  std::vector<int> counts;
  int failures = 0;
};

struct ExperimentResult {
  int k0 = 0;
  int max_units = 0;
  int replications = 0;
  std::vector<std::string> penalties;
  std::vector<long long> n_grid;
  /// Ordered by (penalty, n).
  std::vector<CellCounts> cells;
  /// Ordered by (n, replication).
  std::vector<ReplicationRecord> records;
  /// Not serialized with the deterministic result files.
  double wall_clock_seconds = 0.0;
  int threads_used = 1;
};

/// Seed of replication r at sample size n.
std::uint64_t replication_seed(std::uint64_t base_seed, int replication, long long n);

/// Replicated generate -> profile_fit -> select. Output is independent of
/// `threads`; a replication whose fits fail is recorded and excluded from the
/// counts.
ExperimentResult run_consistency_experiment(const ExperimentConfig& cfg, int threads = 1);

struct FrequencyRow {
  std::string penalty;
  long long n = 0;
  int k = 0;
  double frequency = 0.0;
};

struct FrequencyTable {
  std::vector<FrequencyRow> rows;
  struct Correct {
    std::string penalty;
    long long n = 0;
    double p_correct = 0.0;
    double p_over = 0.0;
    double failure_rate = 0.0;
  };
  std::vector<Correct> correct;
  std::vector<std::string> warnings;
};

/// Empirical P(k_hat = k) per (penalty, n), normalized by the number of
/// replications so that each cell sums to 1 minus its failure mass.
FrequencyTable summarize(const ExperimentResult& result);

}  // namespace mlpsel
