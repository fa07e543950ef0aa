// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlpsel/config.hpp"
#include "mlpsel/io.hpp"
#include "mlpsel/mle.hpp"
#include "mlpsel/mlp.hpp"
#include "mlpsel/param_space.hpp"
#include "mlpsel/selection.hpp"
#include "mlpsel/sim.hpp"
#include "mlpsel/theory.hpp"
#include "oracles.hpp"

using namespace mlpsel;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const TransferFunction kTanh{TransferKind::tanh};
const TransferFunction kLogistic{TransferKind::logistic};
const InputDist kNormal = InputDist::standard_normal(1);

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2718);
  int bad = 0;
  double worst = 0.0;
  for (const auto& phi : {kTanh, kLogistic}) {
    for (int rep = 0; rep < 100; ++rep) {
      const int k = 1 + rep % 4;
      const int d = 1 + (rep / 4) % 3;
      const Theta th = oracle::random_theta(rng, k, d);
      const Dataset data = oracle::random_data(rng, d, 30);
      auto f = [&](const Eigen::VectorXd& v) { return oracle::loglik(Theta(k, d, v), phi.kind(), 1.0, data); };
      const Eigen::VectorXd fd = oracle::central_gradient(f, th.values());
      const double viol = oracle::gradient_violation(cond_loglik_grad(th, phi, 1.0, data), fd, 1e-6, 1e-8);
      worst = std::max(worst, viol);
      if (viol > 0.0) ++bad;
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 10.0,
          std::to_string(bad) + "/200 instances outside rtol 1e-6, " + fmt(secs) + " s"};
}

double sup_gap(const Theta& a, const Theta& b, int d) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> x(static_cast<std::size_t>(d));
  double worst = 0.0;
  for (int m = 0; m < 2000; ++m) {
    if (d == 1) {
      x[0] = -5.0 + 10.0 * m / 1999.0;
    } else {
      for (double& v : x) v = u(rng);
    }
    worst = std::max(worst, std::abs(mlp_forward(a, kTanh, x) - mlp_forward(b, kTanh, x)));
  }
  return worst;
}

Outcome fiber_witnesses() {
  std::mt19937_64 rng(4242);
  double worst_sup = 0.0;
  double worst_ll = 0.0;
  int infeasible = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int k0 = 1 + rep % 3;
    const int d = 1 + rep % 2;
    const int k = k0 + 1 + rep % 3;
    const Theta th0 = oracle::random_theta(rng, k0, d);
    const ThetaSpace space{k, d};
    const Theta th = nonident_witness(th0, k, 1000 + static_cast<std::uint64_t>(rep), space);
    if (!space.contains(th)) ++infeasible;
    worst_sup = std::max(worst_sup, sup_gap(th, th0, d));
    const Dataset data = oracle::random_data(rng, d, 50);
    const double l0 = cond_loglik(th0, kTanh, 1.0, data);
    worst_ll = std::max(worst_ll, std::abs(cond_loglik(th, kTanh, 1.0, data) - l0) / std::abs(l0));
  }
  // Splitting an output weight changes the summation order, so the
  // log-likelihoods agree to rounding rather than bit for bit.
  return {infeasible == 0 && worst_sup <= 1e-12 && worst_ll <= 1e-12,
          "sup error " + fmt(worst_sup) + ", loglik rel diff " + fmt(worst_ll) + ", infeasible " +
              std::to_string(infeasible)};
}

Outcome mle_oracle() {
  const ThetaSpace space{1, 1, 2.0, 0.5};
  double fit_secs = 0.0;
  double worst = INFINITY;
  int bad = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const Theta th0 = sample_init(space, 500 + static_cast<std::uint64_t>(rep));
    const Dataset data = generate(th0, kTanh, 0.25, kNormal, 50, 700 + static_cast<std::uint64_t>(rep));
    const auto t0 = Clock::now();
    const FitResult r = fit(data, space, kTanh, 0.25, OptConfig{});
    fit_secs += seconds_since(t0);
    const double best = oracle::grid_search_k1(data, 0.25, 2.0, 0.5, 31);
    worst = std::min(worst, r.loglik - best);
    if (r.loglik < best - 1e-3) ++bad;
  }
  return {bad == 0 && fit_secs < 120.0, "min(fit - grid) = " + fmt(worst) + ", " + std::to_string(bad) +
                                            "/20 below tolerance, fits " + fmt(fit_secs) + " s"};
}

Outcome d_norm_oracle() {
  const Theta th0 = Theta::from_parts(0, {2}, {0}, {{1.5}});
  const RatioContext ctx{th0, kTanh, 1.0};
  std::mt19937_64 rng(99);
  std::normal_distribution<double> z(0.0, 0.15);
  int outside = 0;
  double worst_z = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    Theta th(2, 1);
    th.beta() = z(rng);
    th.a(0) = 1.2 + z(rng);
    th.a(1) = 0.8 + z(rng);
    th.b(0) = std::abs(z(rng));
    th.b(1) = 0.3 + z(rng);
    th.w(0, 0) = 1.5 + z(rng);
    th.w(1, 0) = 1.0 + z(rng);
    const auto seed = static_cast<std::uint64_t>(rep);
    const McEstimate closed = d_norm(th, ctx, kNormal, 200'000, 300 + seed);
    const oracle::Estimate brute = oracle::d_norm_brute_force(th, th0, TransferKind::tanh, 1.0, 400'000, 600 + seed);
    const double zscore = std::abs(closed.value - brute.value) / std::hypot(closed.std_error, brute.std_error);
    worst_z = std::max(worst_z, zscore);
    if (zscore > 3.0) ++outside;
  }

  const RatioContext ctx25{th0, kTanh, 0.25};
  double worst_rel = 0.0;
  for (double c : {0.05, 0.2, 0.5}) {
    Theta th = th0;
    th.beta() += c;
    const double exact = std::sqrt(std::expm1(c * c / 0.25));
    const double est = d_norm(th, ctx25, kNormal, 1'000'000, 17).value;
    worst_rel = std::max(worst_rel, std::abs(est - exact) / exact);
  }
  return {outside == 0 && worst_rel <= 1e-3, std::to_string(outside) + "/20 beyond 3 SE (max " + fmt(worst_z) +
                                                  "), constant shift rel err " + fmt(worst_rel)};
}

Outcome lemma_remainder() {
  const auto t0 = Clock::now();
  const RunConfig cfg = parse_run_config("{}");
  const Reparam fiber = build_reparam(nonident_witness(cfg.theta0, cfg.witness), cfg.theta0);
  const RatioContext ctx = cfg.ratio_context();
  const auto labels = fiber.phi_labels();
  std::string failing;
  for (Eigen::Index m = 0; m < fiber.phi.size(); ++m) {
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(fiber.phi.size());
    dir[m] = 1.0;
    const auto rows =
        expansion_remainder_study(fiber, dir, {1e-1, 1e-2, 1e-3}, ctx, cfg.input, cfg.lemma_n_mc, cfg.lemma_seed);
    bool ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].flagged) ok = false;
      if (i > 0 && !(rows[i].R_over_D < rows[i - 1].R_over_D)) ok = false;
    }
    if (!ok) failing += " " + labels[static_cast<std::size_t>(m)];
  }
  const double secs = seconds_since(t0);
  return {failing.empty() && secs < 120.0,
          std::to_string(fiber.phi.size()) + " directions, " +
              (failing.empty() ? std::string("all decreasing") : "not decreasing:" + failing) + ", " + fmt(secs) +
              " s"};
}

Outcome gram_check() {
  const Theta dup = Theta::from_parts(0, {1, 0.5}, {0.3, 0.3}, {{1.2}, {1.2}});
  const double dup_min = gram_matrix_H3(dup, kTanh, GramSpec{kNormal}).min_eigenvalue;
  const Theta generic = Theta::from_parts(0, {1}, {0.3}, {{1.2}});
  GramSpec spec{kNormal};
  const double g200 = gram_matrix_H3(generic, kTanh, spec).min_eigenvalue;
  spec.n_nodes = 400;
  const double g400 = gram_matrix_H3(generic, kTanh, spec).min_eigenvalue;
  const double rel = std::abs(g400 - g200) / g200;
  return {std::abs(dup_min) <= 1e-10 && g200 > 1e-8 && rel <= 0.01,
          "duplicated " + fmt(dup_min) + ", generic " + fmt(g200) + " (400 nodes: rel change " + fmt(rel) + ")"};
}

Outcome h4_verdicts() {
  const std::vector<long long> grid{10, 100, 1000, 10000, 100000, 1000000};
  const std::vector<std::pair<int, int>> pairs{{2, 1}, {3, 2}, {4, 3}, {4, 1}};
  const H4Report bic = check_H4(PenaltySpec::bic(), 1, pairs, grid);
  const H4Report aic = check_H4(PenaltySpec::aic_like(), 1, pairs, grid);
  const H4Report lin = check_H4(PenaltySpec::custom(1.0, 1.0), 1, pairs, grid);
  const bool ok = bic.passed && bic.monotone.passed && bic.divergence.passed && bic.sublinear.passed &&
                  !aic.passed && aic.monotone.passed && !aic.divergence.passed && aic.sublinear.passed &&
                  !lin.passed && lin.monotone.passed && lin.divergence.passed && !lin.sublinear.passed;
  auto v = [](const H4Report& r) { return r.passed ? "pass" : "fail"; };
  return {ok, std::string("bic ") + v(bic) + ", aic_like " + v(aic) + " (divergence), linear " + v(lin) +
                  " (ratio)"};
}

ExperimentConfig consistency_config() {
  ExperimentConfig cfg;
  cfg.theta0 = Theta::from_parts(0, {2, -1}, {0, 2}, {{1.5}, {-3}});
  cfg.sigma2 = 0.25;
  cfg.input = kNormal;
  cfg.n_grid = {100, 500, 2000, 8000};
  cfg.replications = 100;
  cfg.max_units = 4;
  cfg.penalties = {PenaltySpec::bic(), PenaltySpec::aic_like()};
  // Five random starts plus the warm start keep the run within budget on a
  // single core; a three-replication pilot with 20 starts chose the same k.
  cfg.opt.n_starts = 5;
  cfg.base_seed = 20240;
  return cfg;
}

struct ExperimentFiles {
  std::string experiment;
  std::string frequencies;
  std::string curve;
};

ExperimentFiles write_run(const ExperimentResult& res, const fs::path& dir) {
  const FrequencyTable table = summarize(res);
  ExperimentFiles f{io::to_json(res).dump(2) + "\n", io::frequency_csv(table), io::consistency_curve_csv(table)};
  fs::create_directories(dir);
  io::write_text(dir / "experiment.json", f.experiment);
  io::write_text(dir / "frequencies.csv", f.frequencies);
  io::write_text(dir / "consistency_curve.csv", f.curve);
  return f;
}

const FrequencyTable::Correct* find_row(const FrequencyTable& t, const std::string& penalty, long long n) {
  for (const auto& c : t.correct)
    if (c.penalty == penalty && c.n == n) return &c;
  return nullptr;
}

Outcome consistency(const FrequencyTable& t, const ExperimentConfig& cfg, double secs) {
  std::string curve;
  std::vector<double> p;
  double worst_failure = 0.0;
  for (long long n : cfg.n_grid) {
    const auto* row = find_row(t, "bic", n);
    if (!row) return {false, "missing bic row for n = " + std::to_string(n)};
    p.push_back(row->p_correct);
    curve += (curve.empty() ? "" : ", ") + fmt(row->p_correct);
  }
  for (const auto& c : t.correct) worst_failure = std::max(worst_failure, c.failure_rate);
  int inversions = 0;
  bool small = true;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] < p[i - 1]) {
      ++inversions;
      if (p[i - 1] - p[i] > 0.05 + 1e-12) small = false;
    }
  }
  const bool ok = inversions <= 1 && small && p.back() >= 0.9 && worst_failure < 0.02;
  return {ok, "P(k_hat = 2) = (" + curve + "), failure rate " + fmt(worst_failure) + ", " + fmt(secs) + " s"};
}

Outcome negative_control(const FrequencyTable& t) {
  const auto* bic = find_row(t, "bic", 8000);
  const auto* aic = find_row(t, "aic_like", 8000);
  if (!bic || !aic) return {false, "missing rows at n = 8000"};
  const double gap = aic->p_over - bic->p_over;
  return {gap >= 0.1, "P(k_hat > 2) at n = 8000: aic_like " + fmt(aic->p_over) + ", bic " + fmt(bic->p_over)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mlpsel acceptance gate"};
  int threads = 1;
  std::string work = "acceptance_out";
  app.add_option("--threads", threads, "Worker threads for the Monte Carlo runs")->check(CLI::PositiveNumber);
  app.add_option("--work", work, "Directory for result files");
  CLI11_PARSE(app, argc, argv);

  int failed = 0;
  auto report = [&](int id, const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failed;
  };
  auto guarded = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "gradient suite", guarded(gradient_suite));
  report(2, "non-identifiability fiber", guarded(fiber_witnesses));
  report(3, "MLE vs grid oracle", guarded(mle_oracle));
  report(4, "closed-form D oracle", guarded(d_norm_oracle));
  report(5, "expansion remainder", guarded(lemma_remainder));
  report(6, "Gram independence", guarded(gram_check));
  report(7, "penalty-condition verdicts", guarded(h4_verdicts));

  const ExperimentConfig cfg = consistency_config();
  const int other = threads == 1 ? 2 : 1;
  try {
    auto t0 = Clock::now();
    const ExperimentResult first = run_consistency_experiment(cfg, threads);
    const double secs = seconds_since(t0);
    const ExperimentFiles a = write_run(first, fs::path(work) / ("threads_" + std::to_string(threads)));
    const FrequencyTable table = summarize(first);
    report(8, "consistency Monte Carlo", consistency(table, cfg, secs));
    report(9, "negative control", negative_control(table));

    const ExperimentResult second = run_consistency_experiment(cfg, other);
    const ExperimentFiles b = write_run(second, fs::path(work) / ("threads_" + std::to_string(other)));
    const bool same = a.experiment == b.experiment && a.frequencies == b.frequencies && a.curve == b.curve;
    report(10, "determinism",
           {same, std::string("threads ") + std::to_string(threads) + " vs " + std::to_string(other) + ": " +
                      (same ? "3 files byte-identical" : "files differ")});
  } catch (const std::exception& e) {
    for (int id = 8; id <= 10; ++id) report(id, "consistency Monte Carlo", {false, std::string("exception: ") + e.what()});
  }

  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
