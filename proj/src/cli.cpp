#include "mlpsel/cli.hpp"

#include <filesystem>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mlpsel/config.hpp"
#include "mlpsel/errors.hpp"
#include "mlpsel/io.hpp"
#include "mlpsel/mle.hpp"
#include "mlpsel/selection.hpp"
#include "mlpsel/sim.hpp"
#include "mlpsel/theory.hpp"

namespace fs = std::filesystem;

namespace mlpsel {

namespace {

struct CommonOptions {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, CommonOptions& opts) {
  sub->add_option("--config", opts.config, "JSON run configuration");
  sub->add_option("--out", opts.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", opts.seed, "Override the subcommand's seed");
}

RunConfig load(const CommonOptions& opts) {
  return opts.config.empty() ? parse_run_config("{}") : load_run_config(opts.config);
}

fs::path prepare_out(const CommonOptions& opts) {
  const fs::path dir(opts.out);
  fs::create_directories(dir);
  return dir;
}

PenaltySpec parse_penalty_flag(const std::string& text) {
  if (text == "bic") return PenaltySpec::bic();
  if (text == "aic_like") return PenaltySpec::aic_like();
  // custom:<c>:<alpha>
  if (text.rfind("custom:", 0) == 0) {
    std::istringstream in(text.substr(7));
    double c = 0.0;
    double alpha = 0.0;
    char sep = 0;
    if (in >> c >> sep >> alpha && sep == ':' && in.peek() == EOF) {
      PenaltySpec spec = PenaltySpec::custom(c, alpha);
      spec.validate();
      return spec;
    }
  }
  throw ConfigError("--penalty: expected bic, aic_like or custom:<c>:<alpha>, got '" + text + "'");
}

int cmd_gen_data(const CommonOptions& opts, std::optional<long long> n, std::ostream& out) {
  RunConfig cfg = load(opts);
  if (opts.seed) cfg.data_seed = *opts.seed;
  if (n) {
    if (*n < 1) throw ConfigError("--n must be >= 1");
    cfg.data_n = *n;
  }
  const Dataset data = generate(cfg.theta0, cfg.phi, cfg.sigma2, cfg.input,
                                static_cast<std::size_t>(cfg.data_n), cfg.data_seed);
  const fs::path path = prepare_out(opts) / "data.csv";
  io::write_dataset_csv(path, data);
  out << "wrote " << path.string() << " (n = " << data.n() << ", d = " << data.d() << ")\n";
  return kExitOk;
}

int cmd_fit(const CommonOptions& opts, const std::string& data_path, int k, std::ostream& out) {
  RunConfig cfg = load(opts);
  if (opts.seed) cfg.opt.base_seed = *opts.seed;
  const fs::path src = data_path.empty() ? fs::path(opts.out) / "data.csv" : fs::path(data_path);
  const Dataset data = io::read_dataset_csv(src);
  if (data.d() != cfg.theta0.d())
    throw InvalidInput("dataset dimension " + std::to_string(data.d()) +
                       " differs from the configured model dimension " +
                       std::to_string(cfg.theta0.d()));
  if (k < 0 || k > cfg.max_units)
    throw ConfigError("--k must lie in 1..selection.max_units (0 fits every k)");

  std::vector<FitResult> profile;
  if (k == 0)
    profile = profile_fit(data, cfg.spaces(), cfg.phi, cfg.sigma2, cfg.opt);
  else
    profile.push_back(fit(data, cfg.space_for(k), cfg.phi, cfg.sigma2, cfg.opt));

  io::json doc{{"n", data.n()},
               {"d", data.d()},
               {"sigma2", cfg.sigma2},
               {"transfer", cfg.phi.name()},
               {"fits", io::to_json(profile)}};
  const fs::path path = prepare_out(opts) / "fit.json";
  io::write_json(path, doc);
  for (const auto& f : profile) out << "k = " << f.k << "  loglik = " << io::format_double(f.loglik) << "\n";
  out << "wrote " << path.string() << "\n";
  return kExitOk;
}

int cmd_select(const CommonOptions& opts, const std::string& fits_path,
               const std::string& penalty_flag, std::ostream& out) {
  const RunConfig cfg = load(opts);
  const PenaltySpec spec = penalty_flag.empty() ? cfg.penalties.front() : parse_penalty_flag(penalty_flag);
  const fs::path src = fits_path.empty() ? fs::path(opts.out) / "fit.json" : fs::path(fits_path);
  const io::json doc = io::read_json(src);
  if (!doc.is_object() || !doc.contains("fits") || !doc.contains("n") || !doc.contains("d"))
    throw InvalidInput("'" + src.string() + "' is not a fit file (needs n, d and fits)");
  const auto profile = io::profile_from_json(doc.at("fits"));
  const SelectionResult sel = select(profile, spec, doc.at("n").get<long long>(), doc.at("d").get<int>());

  const fs::path dir = prepare_out(opts);
  io::write_json(dir / "selection.json", io::to_json(sel));
  io::write_text(dir / "selection_table.csv", io::selection_table_csv(sel));
  out << "penalty = " << spec.name() << "  k_hat = " << sel.k_hat << "\n";
  return kExitOk;
}

int cmd_mc(const CommonOptions& opts, int threads, std::ostream& out) {
  RunConfig cfg = load(opts);
  if (opts.seed) cfg.experiment_seed = *opts.seed;
  if (threads < 1) throw ConfigError("--threads must be >= 1");
  const ExperimentResult result = run_consistency_experiment(cfg.experiment(), threads);
  const FrequencyTable table = summarize(result);

  const fs::path dir = prepare_out(opts);
  io::write_json(dir / "experiment.json", io::to_json(result));
  io::write_text(dir / "frequencies.csv", io::frequency_csv(table));
  io::write_text(dir / "consistency_curve.csv", io::consistency_curve_csv(table));
  for (const auto& w : table.warnings) out << "warning: " << w << "\n";
  for (const auto& c : table.correct)
    out << c.penalty << "  n = " << c.n << "  P(k_hat = k0) = " << io::format_double(c.p_correct)
        << "  P(k_hat > k0) = " << io::format_double(c.p_over) << "\n";
  out << "elapsed " << result.wall_clock_seconds << " s on " << result.threads_used << " thread(s)\n";
  return kExitOk;
}

int cmd_verify_lemma(const CommonOptions& opts, std::ostream& out) {
  RunConfig cfg = load(opts);
  if (opts.seed) cfg.lemma_seed = *opts.seed;
  const Theta witness = nonident_witness(cfg.theta0, cfg.witness);
  const Reparam fiber = build_reparam(witness, cfg.theta0);
  const RatioContext ctx = cfg.ratio_context();
  const auto labels = fiber.phi_labels();

  std::vector<std::pair<std::string, std::vector<RemainderRow>>> study;
  bool all_decreasing = true;
  for (Eigen::Index m = 0; m < fiber.phi.size(); ++m) {
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(fiber.phi.size());
    dir[m] = 1.0;
    auto rows = expansion_remainder_study(fiber, dir, cfg.delta_grid, ctx, cfg.input,
                                          cfg.lemma_n_mc, cfg.lemma_seed);
    bool decreasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].flagged) decreasing = false;
      if (i > 0 && !(rows[i].R_over_D < rows[i - 1].R_over_D)) decreasing = false;
    }
    all_decreasing = all_decreasing && decreasing;
    out << labels[static_cast<std::size_t>(m)] << ": R/D " << (decreasing ? "decreasing" : "NOT decreasing") << "\n";
    study.emplace_back(labels[static_cast<std::size_t>(m)], std::move(rows));
  }
  const fs::path path = prepare_out(opts) / "remainder.csv";
  io::write_text(path, io::remainder_csv(study));
  out << "verdict: " << (all_decreasing ? "pass" : "fail") << "\nwrote " << path.string() << "\n";
  return kExitOk;
}

int cmd_check_ident(const CommonOptions& opts, std::ostream& out) {
  RunConfig cfg = load(opts);
  if (opts.seed) cfg.gram.seed = *opts.seed;
  const GramReport rep = gram_matrix_H3(cfg.theta0, cfg.phi, cfg.gram);
  const fs::path dir = prepare_out(opts);
  io::write_text(dir / "gram.csv", io::gram_csv(rep));
  io::write_json(dir / "gram_report.json", io::to_json(rep));
  out << "min eigenvalue = " << io::format_double(rep.min_eigenvalue) << "\nverdict: "
      << (rep.independent ? "independent" : "dependent") << "\n";
  return kExitOk;
}

int cmd_check_penalty(const CommonOptions& opts, const std::string& penalty_flag, std::ostream& out) {
  const RunConfig cfg = load(opts);
  std::vector<PenaltySpec> specs = cfg.penalties;
  if (!penalty_flag.empty()) specs = {parse_penalty_flag(penalty_flag)};
  io::json reports = io::json::array();
  for (const auto& spec : specs) {
    const H4Report rep = check_H4(spec, cfg.theta0.d(), cfg.h4_k_pairs, cfg.h4_n_grid, cfg.h4);
    reports.push_back(io::to_json(rep));
    out << spec.name() << ": " << (rep.passed ? "pass" : "fail");
    for (const auto* c : {&rep.monotone, &rep.divergence, &rep.sublinear})
      if (!c->passed) out << " (" << c->name << ": " << c->detail << ")";
    out << "\n";
  }
  io::write_json(prepare_out(opts) / "h4_report.json", reports);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hidden-unit number estimation for one-hidden-layer MLP regression"};
  app.require_subcommand(1);

  CommonOptions gen_opts, fit_opts, sel_opts, mc_opts, lemma_opts, ident_opts, pen_opts;
  std::optional<long long> gen_n;
  std::string data_path, fits_path, sel_penalty, pen_penalty;
  int fit_k = 0;
  int threads = 1;

  auto* gen = app.add_subcommand("gen-data", "Simulate a dataset from the configured true model");
  add_common(gen, gen_opts);
  gen->add_option("--n", gen_n, "Sample size (overrides data.n)");

  auto* fitc = app.add_subcommand("fit", "Maximize the likelihood for k = 1..M (or one k)");
  add_common(fitc, fit_opts);
  fitc->add_option("--data", data_path, "Dataset CSV (default <out>/data.csv)");
  fitc->add_option("--k", fit_k, "Single hidden-unit count; 0 profiles k = 1..M");

  auto* selc = app.add_subcommand("select", "Penalized-likelihood choice of k from a fit file");
  add_common(selc, sel_opts);
  selc->add_option("--fits", fits_path, "Fit JSON (default <out>/fit.json)");
  selc->add_option("--penalty", sel_penalty, "bic, aic_like or custom:<c>:<alpha>");

  auto* mc = app.add_subcommand("mc-consistency", "Replicated selection experiment");
  add_common(mc, mc_opts);
  mc->add_option("--threads", threads, "Worker threads (results do not depend on it)");

  auto* lemma = app.add_subcommand("verify-lemma", "Remainder study of the likelihood-ratio expansion");
  add_common(lemma, lemma_opts);

  auto* ident = app.add_subcommand("check-ident", "Gram-matrix linear independence check");
  add_common(ident, ident_opts);

  auto* pen = app.add_subcommand("check-penalty", "Finite-grid check of the penalty conditions");
  add_common(pen, pen_opts);
  pen->add_option("--penalty", pen_penalty, "bic, aic_like or custom:<c>:<alpha>");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_opts, gen_n, out);
    if (fitc->parsed()) return cmd_fit(fit_opts, data_path, fit_k, out);
    if (selc->parsed()) return cmd_select(sel_opts, fits_path, sel_penalty, out);
    if (mc->parsed()) return cmd_mc(mc_opts, threads, out);
    if (lemma->parsed()) return cmd_verify_lemma(lemma_opts, out);
    if (ident->parsed()) return cmd_check_ident(ident_opts, out);
    if (pen->parsed()) return cmd_check_penalty(pen_opts, pen_penalty, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace mlpsel
