#include "mlpsel/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mlpsel/errors.hpp"
#include "mlpsel/mlp.hpp"

namespace mlpsel {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 50;

bool finite_eval(double ll, const Eigen::VectorXd& grad) {
  return std::isfinite(ll) && grad.allFinite();
}

}  // namespace

void OptConfig::validate() const {
  if (n_starts < 1) throw ConfigError("OptConfig: n_starts must be >= 1");
  if (max_iters < 1) throw ConfigError("OptConfig: max_iters must be >= 1");
  if (!(grad_tol > 0.0) || !(step_tol > 0.0))
    throw ConfigError("OptConfig: tolerances must be > 0");
  if (!(init_bound >= 0.0)) throw ConfigError("OptConfig: init_bound must be >= 0");
}

ThetaSpace start_space(const ThetaSpace& space, const OptConfig& cfg) {
  ThetaSpace s = space;
  if (cfg.init_bound > 0.0 && cfg.init_bound < s.bound) {
    s.bound = cfg.init_bound;
    // Keep the reduced box feasible for the norm constraint.
    s.bound = std::max(s.bound, s.eta / std::sqrt(static_cast<double>(s.d)));
  }
  return s;
}

AscentTrace projected_ascent(const Dataset& data, const ThetaSpace& space,
                             const TransferFunction& phi, double sigma2, const OptConfig& cfg,
                             const Theta& start, bool record_history) {
  AscentTrace out;
  out.theta = project(start, space);
  const double scale = 1.0 / static_cast<double>(data.n());
  const auto p = static_cast<Eigen::Index>(out.theta.size());

  // Minimize f = -l_n / n so tolerances do not depend on n.
  Eigen::VectorXd grad;
  double ll = cond_loglik_with_grad(out.theta, phi, sigma2, data, grad);
  if (!finite_eval(ll, grad)) {
    out.failed = true;
    return out;
  }
  double f = -ll * scale;
  Eigen::VectorXd g = -grad * scale;
  if (record_history) out.history.push_back(ll);

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(p, p);
  bool h_identity = true;
  Eigen::VectorXd dir(p);
  Eigen::VectorXd trial_grad;
  std::vector<bool> active(static_cast<std::size_t>(p));

  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    const auto& v = out.theta.values();
    double pg_inf = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      active[ju] = (v[j] <= space.lower(ju) && g[j] > 0.0) || (v[j] >= space.bound && g[j] < 0.0);
      if (!active[ju]) pg_inf = std::max(pg_inf, std::abs(g[j]));
    }
    if (pg_inf <= cfg.grad_tol) {
      out.converged = true;
      break;
    }

    auto direction = [&](bool use_h) {
      dir = use_h ? Eigen::VectorXd(-(H * g)) : Eigen::VectorXd(-g);
      for (Eigen::Index j = 0; j < p; ++j)
        if (active[static_cast<std::size_t>(j)]) dir[j] = 0.0;
    };
    direction(!h_identity);
    if (!(g.dot(dir) < 0.0)) {
      H.setIdentity();
      h_identity = true;
      direction(false);
    }

    double alpha = 1.0;
    bool accepted = false;
    Theta trial;
    double trial_f = 0.0;
    for (int ls = 0; ls < kMaxHalvings; ++ls, alpha *= 0.5) {
      trial = project(Theta(out.theta.k(), out.theta.d(), v + alpha * dir), space);
      const Eigen::VectorXd step = trial.values() - v;
      if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
      const double trial_ll = cond_loglik_with_grad(trial, phi, sigma2, data, trial_grad);
      if (!finite_eval(trial_ll, trial_grad)) {
        out.failed = true;
        out.iterations = iter;
        return out;
      }
      trial_f = -trial_ll * scale;
      if (trial_f <= f && trial_f <= f + kArmijo * std::min(0.0, g.dot(step))) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!h_identity) {
        H.setIdentity();
        h_identity = true;
        continue;
      }
      // No decrease along steepest descent at machine precision.
      break;
    }

    const Eigen::VectorXd s = trial.values() - v;
    const Eigen::VectorXd gt = -trial_grad * scale;
    const Eigen::VectorXd y = gt - g;
    out.theta = std::move(trial);
    f = trial_f;
    g = gt;
    if (record_history) out.history.push_back(-f / scale);

    if (s.lpNorm<Eigen::Infinity>() <= cfg.step_tol) {
      out.converged = true;
      ++iter;
      break;
    }
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      if (h_identity) H *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(p, p) - rho * s * y.transpose();
      H = left * H * left.transpose() + rho * s * s.transpose();
      h_identity = false;
    }
  }
  out.iterations = iter;
  out.loglik = -f / scale;
  return out;
}

FitResult fit(const Dataset& data, const ThetaSpace& space, const TransferFunction& phi,
              double sigma2, const OptConfig& cfg, const std::vector<Theta>& extra_starts) {
  cfg.validate();
  space.validate();
  if (data.d() != space.d)
    throw InvalidInput("fit: data dimension " + std::to_string(data.d()) +
                       " does not match space dimension " + std::to_string(space.d));
  if (!(sigma2 > 0.0)) throw InvalidInput("fit: sigma2 must be > 0");

  FitResult result;
  result.k = space.k;
  const int total = cfg.n_starts + static_cast<int>(extra_starts.size());
  double best = -std::numeric_limits<double>::infinity();
  int best_index = -1;
  Theta best_theta;
  const ThetaSpace init_space = start_space(space, cfg);

  for (int s = 0; s < total; ++s) {
    StartRecord rec;
    Theta start;
    if (s < cfg.n_starts) {
      rec.seed = cfg.base_seed + static_cast<std::uint64_t>(s);
      start = sample_init(init_space, rec.seed);
    } else {
      rec.warm = true;
      start = extra_starts[static_cast<std::size_t>(s - cfg.n_starts)];
    }
    AscentTrace trace = projected_ascent(data, space, phi, sigma2, cfg, start);
    rec.converged = trace.converged;
    rec.failed = trace.failed;
    rec.iterations = trace.iterations;
    rec.loglik = trace.failed ? std::numeric_limits<double>::quiet_NaN() : trace.loglik;
    if (!trace.failed && trace.loglik > best) {
      best = trace.loglik;
      best_index = s;
      best_theta = std::move(trace.theta);
    }
    result.starts.push_back(rec);
  }
  result.n_starts_used = total;
  if (best_index < 0)
    throw OptimizationFailure("fit: all " + std::to_string(total) + " starts failed for k = " +
                              std::to_string(space.k));
  result.best_start = best_index;
  result.theta_hat = std::move(best_theta);
  result.loglik = cond_loglik(result.theta_hat, phi, sigma2, data);
  return result;
}

Theta embed_with_extra_unit(const Theta& theta, const ThetaSpace& target_space,
                            std::uint64_t seed) {
  if (target_space.k != theta.k() + 1 || target_space.d != theta.d())
    throw InvalidInput("embed_with_extra_unit: target space must have k + 1 units");
  const Theta extra = sample_init(target_space.with_k(1), seed);
  Theta out(theta.k() + 1, theta.d());
  out.beta() = theta.beta();
  for (int i = 0; i < theta.k(); ++i) {
    out.a(i) = theta.a(i);
    out.b(i) = theta.b(i);
    for (int l = 0; l < theta.d(); ++l) out.w(i, l) = theta.w(i, l);
  }
  const int j = theta.k();
  out.a(j) = 0.0;
  out.b(j) = extra.b(0);
  for (int l = 0; l < theta.d(); ++l) out.w(j, l) = extra.w(0, l);
  return out;
}

std::vector<FitResult> profile_fit(const Dataset& data, const std::vector<ThetaSpace>& spaces,
                                   const TransferFunction& phi, double sigma2,
                                   const OptConfig& cfg) {
  if (spaces.empty()) throw InvalidInput("profile_fit: need at least one space (M >= 1)");
  std::vector<FitResult> out;
  out.reserve(spaces.size());
  for (std::size_t m = 0; m < spaces.size(); ++m) {
    if (spaces[m].k != static_cast<int>(m) + 1)
      throw InvalidInput("profile_fit: spaces must be ordered k = 1..M");
    std::vector<Theta> warm;
    if (m > 0) {
      // Offset keeps the warm-start location stream apart from start seeds.
      const std::uint64_t seed = cfg.base_seed + 0x9E3779B97F4A7C15ULL * (m + 1);
      warm.push_back(embed_with_extra_unit(out.back().theta_hat, spaces[m], seed));
    }
    out.push_back(fit(data, spaces[m], phi, sigma2, cfg, warm));
  }
  return out;
}

}  // namespace mlpsel
