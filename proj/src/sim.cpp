#include "mlpsel/sim.hpp"

#include <chrono>
#include <cmath>

#include "mlpsel/errors.hpp"
#include "mlpsel/mlp.hpp"
#include "mlpsel/parallel.hpp"
#include "mlpsel/rng.hpp"

namespace mlpsel {

Dataset generate(const Theta& theta0, const TransferFunction& phi, double sigma2,
                 const InputDist& dist, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("generate: n must be >= 1");
  if (!(sigma2 > 0.0)) throw InvalidInput("generate: sigma2 must be > 0");
  dist.validate();
  if (dist.d() != theta0.d()) throw InvalidInput("generate: input dimension mismatch");

  std::mt19937_64 rng(seed);
  RowMatrix X = dist.sample(rng, n);
  std::normal_distribution<double> noise(0.0, std::sqrt(sigma2));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> x(X.data() + i * static_cast<std::size_t>(X.cols()),
                                    static_cast<std::size_t>(X.cols()));
    y[static_cast<Eigen::Index>(i)] = mlp_forward(theta0, phi, x) + noise(rng);
  }
  return Dataset(std::move(X), std::move(y));
}

void ExperimentConfig::validate() const {
  if (theta0.k() < 1) throw ConfigError("experiment: theta0 is not set");
  if (!(sigma2 > 0.0)) throw ConfigError("experiment: sigma2 must be > 0");
  input.validate();
  if (input.d() != theta0.d()) throw ConfigError("experiment: input dimension differs from theta0");
  if (n_grid.empty()) throw ConfigError("experiment: n_grid is empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw ConfigError("experiment: n_grid entries must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1])
      throw ConfigError("experiment: n_grid must be increasing");
  }
  if (replications < 1) throw ConfigError("experiment: replications must be >= 1");
  if (max_units < theta0.k()) throw ConfigError("experiment: max_units must be >= k0");
  if (penalties.empty()) throw ConfigError("experiment: need at least one penalty");
  for (const auto& p : penalties) p.validate();
  opt.validate();
  ThetaSpace s = space;
  s.d = theta0.d();
  s.validate();
}

std::uint64_t replication_seed(std::uint64_t base_seed, int replication, long long n) {
  return derive_seed(base_seed, {static_cast<std::uint64_t>(replication),
                                 static_cast<std::uint64_t>(n)});
}

ExperimentResult run_consistency_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();

  ExperimentResult out;
  out.k0 = cfg.theta0.k();
  out.max_units = cfg.max_units;
  out.replications = cfg.replications;
  out.n_grid = cfg.n_grid;
  out.threads_used = std::max(1, threads);
  for (const auto& p : cfg.penalties) out.penalties.push_back(p.name());

  std::vector<ThetaSpace> spaces;
  for (int k = 1; k <= cfg.max_units; ++k) {
    ThetaSpace s = cfg.space;
    s.k = k;
    s.d = cfg.theta0.d();
    spaces.push_back(s);
  }

  const std::size_t R = static_cast<std::size_t>(cfg.replications);
  out.records.resize(cfg.n_grid.size() * R);
  parallel_for(out.records.size(), threads, [&](std::size_t idx) {
    ReplicationRecord& rec = out.records[idx];
    rec.n = cfg.n_grid[idx / R];
    rec.replication = static_cast<int>(idx % R);
    rec.data_seed = replication_seed(cfg.base_seed, rec.replication, rec.n);
    try {
      const Dataset data = generate(cfg.theta0, cfg.phi, cfg.sigma2, cfg.input,
                                    static_cast<std::size_t>(rec.n), rec.data_seed);
      OptConfig opt = cfg.opt;
      opt.base_seed = derive_seed(cfg.opt.base_seed, {rec.data_seed});
      const auto profile = profile_fit(data, spaces, cfg.phi, cfg.sigma2, opt);
      for (const auto& fr : profile) rec.logliks.push_back(fr.loglik);
      for (const auto& pen : cfg.penalties)
        rec.k_hat.push_back(select(rec.logliks, pen, rec.n, cfg.theta0.d()).k_hat);
    } catch (const OptimizationFailure& e) {
      rec.failed = true;
      rec.error = e.what();
      rec.logliks.clear();
      rec.k_hat.clear();
    }
  });

  for (std::size_t p = 0; p < cfg.penalties.size(); ++p) {
    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
      CellCounts cell;
      cell.penalty = out.penalties[p];
      cell.n = cfg.n_grid[ni];
      cell.counts.assign(static_cast<std::size_t>(cfg.max_units), 0);
      for (std::size_t r = 0; r < R; ++r) {
        const auto& rec = out.records[ni * R + r];
        if (rec.failed)
          ++cell.failures;
        else
          ++cell.counts[static_cast<std::size_t>(rec.k_hat[p] - 1)];
      }
      out.cells.push_back(std::move(cell));
    }
  }

  out.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

FrequencyTable summarize(const ExperimentResult& result) {
  FrequencyTable table;
  for (const auto& cell : result.cells) {
    const int total = result.replications;
    if (cell.failures >= total) {
      table.warnings.push_back("all replications failed for " + cell.penalty +
                               " at n = " + std::to_string(cell.n));
      continue;
    }
    FrequencyTable::Correct c;
    c.penalty = cell.penalty;
    c.n = cell.n;
    c.failure_rate = static_cast<double>(cell.failures) / total;
    for (std::size_t m = 0; m < cell.counts.size(); ++m) {
      const double f = static_cast<double>(cell.counts[m]) / total;
      const int k = static_cast<int>(m) + 1;
      table.rows.push_back({cell.penalty, cell.n, k, f});
      if (k == result.k0) c.p_correct = f;
      if (k > result.k0) c.p_over += f;
    }
    table.correct.push_back(c);
  }
  return table;
}

}  // namespace mlpsel
