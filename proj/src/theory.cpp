#include "mlpsel/theory.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "mlpsel/errors.hpp"
#include "mlpsel/mlp.hpp"
#include "mlpsel/quadrature.hpp"

namespace mlpsel {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double pre_activation(const Theta& theta, int i, std::span<const double> x) {
  double u = theta.b(i);
  const auto w = theta.w_row(i);
  for (std::size_t l = 0; l < x.size(); ++l) u += w[l] * x[l];
  return u;
}

void check_shapes(const Theta& theta, const RatioContext& ctx, std::size_t x_dim) {
  if (theta.d() != ctx.theta0.d() || x_dim != static_cast<std::size_t>(ctx.theta0.d()))
    throw InvalidInput("dimension mismatch between parameter, true parameter and input");
}

}  // namespace

void RatioContext::validate() const {
  if (theta0.k() < 1) throw InvalidInput("RatioContext: theta0 is not set");
  if (!(sigma2 > 0.0)) throw InvalidInput("RatioContext: sigma2 must be > 0");
}

double RatioContext::e(std::span<const double> x, double y) const {
  return (y - mlp_forward(theta0, phi, x)) / sigma2;
}

// ---------------------------------------------------------------------------
// Reparametrization

Eigen::VectorXd Reparam::phi_at_fiber() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(phi.size());
  out[phi_beta()] = theta0.beta();
  for (int j = 0; j < matched(); ++j) {
    const int i = group_of[static_cast<std::size_t>(j)];
    out[phi_b(j)] = theta0.b(i);
    for (int l = 0; l < d(); ++l) out[phi_w(j, l)] = theta0.w(i, l);
  }
  return out;
}

std::vector<std::string> Reparam::phi_labels() const {
  std::vector<std::string> out(static_cast<std::size_t>(phi.size()));
  out[0] = "beta";
  for (int j = 0; j < matched(); ++j) {
    out[static_cast<std::size_t>(phi_b(j))] = "b" + std::to_string(j + 1);
    for (int l = 0; l < d(); ++l)
      out[static_cast<std::size_t>(phi_w(j, l))] =
          "w" + std::to_string(j + 1) + "_" + std::to_string(l + 1);
  }
  for (int i = 0; i < k0(); ++i)
    out[static_cast<std::size_t>(phi_s(i))] = "s" + std::to_string(i + 1);
  for (int j = matched(); j < k; ++j)
    out[static_cast<std::size_t>(phi_a(j))] = "a" + std::to_string(j + 1);
  return out;
}

Theta Reparam::to_theta() const {
  Theta out(k, d());
  out.beta() = phi[phi_beta()];
  for (int j = 0; j < matched(); ++j) {
    const int i = group_of[static_cast<std::size_t>(j)];
    out.a(j) = (phi[phi_s(i)] + theta0.a(i)) * psi[psi_q(j)];
    out.b(j) = phi[phi_b(j)];
    for (int l = 0; l < d(); ++l) out.w(j, l) = phi[phi_w(j, l)];
  }
  for (int j = matched(); j < k; ++j) {
    out.a(j) = phi[phi_a(j)];
    out.b(j) = psi[psi_b(j)];
    for (int l = 0; l < d(); ++l) out.w(j, l) = psi[psi_w(j, l)];
  }
  return out;
}

Reparam Reparam::with_phi(Eigen::VectorXd new_phi) const {
  if (new_phi.size() != phi.size()) throw InvalidInput("Reparam::with_phi: wrong length");
  Reparam out = *this;
  out.phi = std::move(new_phi);
  return out;
}

Reparam build_reparam(const Theta& theta, const Theta& theta0, double match_tol) {
  const int k = theta.k();
  const int k0 = theta0.k();
  const int d = theta0.d();
  if (theta.d() != d) throw InvalidInput("build_reparam: dimension mismatch");
  if (k < k0) throw InvalidInput("build_reparam: requires k >= k0");
  if (!(match_tol >= 0.0)) throw InvalidInput("build_reparam: match_tol must be >= 0");

  std::vector<std::vector<int>> groups(static_cast<std::size_t>(k0));
  std::vector<int> surplus;
  for (int j = 0; j < k; ++j) {
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k0; ++i) {
      double s = std::pow(theta.b(j) - theta0.b(i), 2);
      for (int l = 0; l < d; ++l) s += std::pow(theta.w(j, l) - theta0.w(i, l), 2);
      const double dist = std::sqrt(s);
      if (dist < best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    if (best_dist <= match_tol)
      groups[static_cast<std::size_t>(best)].push_back(j);
    else
      surplus.push_back(j);
  }

  Reparam rep;
  rep.theta0 = theta0;
  rep.k = k;
  rep.t.push_back(0);
  for (int i = 0; i < k0; ++i) {
    const auto& g = groups[static_cast<std::size_t>(i)];
    if (g.empty())
      throw UnmatchableParameter("build_reparam: no unit lies within " + std::to_string(match_tol) +
                                 " of true unit " + std::to_string(i + 1));
    for (int j : g) {
      rep.order.push_back(j);
      rep.group_of.push_back(i);
    }
    rep.t.push_back(rep.t.back() + static_cast<int>(g.size()));
  }
  for (int j : surplus) rep.order.push_back(j);

  const int T = rep.matched();
  const int S = k - T;
  rep.phi = Eigen::VectorXd::Zero(1 + T * (1 + d) + k0 + S);
  rep.psi = Eigen::VectorXd::Zero(T + S * (1 + d));
  rep.phi[rep.phi_beta()] = theta.beta();

  for (int i = 0; i < k0; ++i) {
    double sum = 0.0;
    double mass = 0.0;
    for (int pos = rep.t[static_cast<std::size_t>(i)]; pos < rep.t[static_cast<std::size_t>(i) + 1]; ++pos) {
      sum += theta.a(rep.order[static_cast<std::size_t>(pos)]);
      mass += std::abs(theta.a(rep.order[static_cast<std::size_t>(pos)]));
    }
    if (sum == 0.0 || std::abs(sum) <= 16.0 * kEps * mass)
      throw DegenerateSplit("build_reparam: output weights of group " + std::to_string(i + 1) +
                            " sum to zero");
    rep.phi[rep.phi_s(i)] = sum - theta0.a(i);
    for (int pos = rep.t[static_cast<std::size_t>(i)]; pos < rep.t[static_cast<std::size_t>(i) + 1]; ++pos) {
      const int src = rep.order[static_cast<std::size_t>(pos)];
      rep.psi[rep.psi_q(pos)] = theta.a(src) / sum;
      rep.phi[rep.phi_b(pos)] = theta.b(src);
      for (int l = 0; l < d; ++l) rep.phi[rep.phi_w(pos, l)] = theta.w(src, l);
    }
  }
  for (int pos = T; pos < k; ++pos) {
    const int src = rep.order[static_cast<std::size_t>(pos)];
    rep.phi[rep.phi_a(pos)] = theta.a(src);
    rep.psi[rep.psi_b(pos)] = theta.b(src);
    for (int l = 0; l < d; ++l) rep.psi[rep.psi_w(pos, l)] = theta.w(src, l);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Likelihood ratio and its L2 norm

FunctionDifference::FunctionDifference(const Theta& theta, const RatioContext& ctx)
    : phi_(ctx.phi), constant_(theta.beta() - ctx.theta0.beta()) {
  if (theta.d() != ctx.theta0.d()) throw InvalidInput("FunctionDifference: dimension mismatch");
  std::vector<double> mass;
  auto add = [&](double coef, double b, std::span<const double> w) {
    for (std::size_t t = 0; t < terms_.size(); ++t) {
      if (terms_[t].b == b && std::equal(w.begin(), w.end(), terms_[t].w.begin())) {
        terms_[t].coef += coef;
        mass[t] += std::abs(coef);
        return;
      }
    }
    terms_.push_back({coef, b, std::vector<double>(w.begin(), w.end())});
    mass.push_back(std::abs(coef));
  };
  for (int i = 0; i < theta.k(); ++i) add(theta.a(i), theta.b(i), theta.w_row(i));
  for (int i = 0; i < ctx.theta0.k(); ++i)
    add(-ctx.theta0.a(i), ctx.theta0.b(i), ctx.theta0.w_row(i));

  // Coefficients that cancel up to rounding of a split weight are exact zeros.
  std::vector<Term> kept;
  for (std::size_t t = 0; t < terms_.size(); ++t)
    if (std::abs(terms_[t].coef) > 16.0 * kEps * mass[t]) kept.push_back(std::move(terms_[t]));
  terms_ = std::move(kept);
}

double FunctionDifference::operator()(std::span<const double> x) const {
  double out = constant_;
  for (const auto& term : terms_) {
    double u = term.b;
    for (std::size_t l = 0; l < x.size(); ++l) u += term.w[l] * x[l];
    out += term.coef * phi_.value(u);
  }
  return out;
}

double density_ratio(const Theta& theta, const RatioContext& ctx, std::span<const double> x,
                     double y) {
  ctx.validate();
  check_shapes(theta, ctx, x.size());
  const double delta = mlp_forward(theta, ctx.phi, x) - mlp_forward(ctx.theta0, ctx.phi, x);
  const double e = ctx.e(x, y);
  return std::exp(delta * e - delta * delta / (2.0 * ctx.sigma2));
}

McEstimate d_norm(const Theta& theta, const RatioContext& ctx, const InputDist& q,
                  std::size_t n_mc, std::uint64_t seed) {
  ctx.validate();
  q.validate();
  if (n_mc < 1) throw InvalidInput("d_norm: n_mc must be >= 1");
  check_shapes(theta, ctx, static_cast<std::size_t>(q.d()));
  McEstimate est;
  est.draws = n_mc;
  const FunctionDifference diff(theta, ctx);
  if (diff.identically_zero()) return est;

  std::mt19937_64 rng(seed);
  std::vector<double> x(static_cast<std::size_t>(q.d()));
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < n_mc; ++s) {
    q.sample(rng, x);
    const double delta = diff(x);
    const double v = std::expm1(delta * delta / ctx.sigma2);
    const double dm = v - mean;
    mean += dm / static_cast<double>(s + 1);
    m2 += dm * (v - mean);
  }
  est.value = std::sqrt(mean);
  if (n_mc > 1 && est.value > 0.0) {
    const double se_mean = std::sqrt(m2 / static_cast<double>(n_mc - 1) / static_cast<double>(n_mc));
    est.std_error = se_mean / (2.0 * est.value);
  }
  return est;
}

double score_s(const Theta& theta, const RatioContext& ctx, std::span<const double> x, double y,
               double d_value) {
  if (!(d_value > 0.0))
    throw FiberPointError("score_s: D = 0, the parameter lies on the true fiber");
  return (density_ratio(theta, ctx, x, y) - 1.0) / d_value;
}

// ---------------------------------------------------------------------------
// Expansion

ExpansionTerms lemma1_terms(const Reparam& rep, const RatioContext& ctx,
                            std::span<const double> x, double y) {
  ctx.validate();
  if (!(rep.theta0 == ctx.theta0))
    throw InvalidInput("lemma1_expansion: reparametrization was built for a different theta0");
  check_shapes(rep.theta0, ctx, x.size());
  const Theta& t0 = rep.theta0;
  const int d = rep.d();
  const Eigen::VectorXd h = rep.phi - rep.phi_at_fiber();

  std::vector<double> v0(static_cast<std::size_t>(rep.k0()));
  std::vector<double> d1(v0.size());
  std::vector<double> d2(v0.size());
  for (int i = 0; i < rep.k0(); ++i) {
    const double u = pre_activation(t0, i, x);
    v0[static_cast<std::size_t>(i)] = ctx.phi.value(u);
    d1[static_cast<std::size_t>(i)] = ctx.phi.d1(u);
    d2[static_cast<std::size_t>(i)] = ctx.phi.d2(u);
  }

  double lin = h[rep.phi_beta()];  // Delta1, the first-order change of F
  double quad = 0.0;               // Delta2, the second-order change of F
  for (int i = 0; i < rep.k0(); ++i) lin += h[rep.phi_s(i)] * v0[static_cast<std::size_t>(i)];
  for (int j = 0; j < rep.matched(); ++j) {
    const auto i = static_cast<std::size_t>(rep.group_of[static_cast<std::size_t>(j)]);
    const double q = rep.psi[rep.psi_q(j)];
    double dv = h[rep.phi_b(j)];
    for (int l = 0; l < d; ++l) dv += h[rep.phi_w(j, l)] * x[static_cast<std::size_t>(l)];
    const double a0 = t0.a(static_cast<int>(i));
    lin += q * a0 * d1[i] * dv;
    quad += q * a0 * d2[i] * dv * dv + 2.0 * h[rep.phi_s(static_cast<int>(i))] * q * d1[i] * dv;
  }
  for (int j = rep.matched(); j < rep.k; ++j) {
    double u = rep.psi[rep.psi_b(j)];
    for (int l = 0; l < d; ++l) u += rep.psi[rep.psi_w(j, l)] * x[static_cast<std::size_t>(l)];
    lin += h[rep.phi_a(j)] * ctx.phi.value(u);
  }

  const double e = ctx.e(x, y);
  ExpansionTerms out;
  out.first = lin * e;
  out.second = 0.5 * (quad * e + lin * lin * (e * e - 1.0 / ctx.sigma2));
  return out;
}

double lemma1_expansion(const Reparam& rep, const RatioContext& ctx, std::span<const double> x,
                        double y) {
  return lemma1_terms(rep, ctx, x, y).value();
}

std::vector<RemainderRow> expansion_remainder_study(const Reparam& fiber_point,
                                                    const Eigen::VectorXd& direction,
                                                    const std::vector<double>& delta_grid,
                                                    const RatioContext& ctx, const InputDist& q,
                                                    std::size_t n_mc, std::uint64_t seed) {
  ctx.validate();
  q.validate();
  if (delta_grid.size() < 3) throw InvalidInput("remainder study: need at least 3 deltas");
  for (std::size_t i = 1; i < delta_grid.size(); ++i)
    if (!(delta_grid[i] < delta_grid[i - 1]))
      throw InvalidInput("remainder study: delta grid must be strictly decreasing");
  if (direction.size() != fiber_point.phi.size())
    throw InvalidInput("remainder study: direction has the wrong length");
  if (n_mc < 1) throw InvalidInput("remainder study: n_mc must be >= 1");

  const Eigen::VectorXd phi0 = fiber_point.phi_at_fiber();
  const double sigma = std::sqrt(ctx.sigma2);
  std::vector<RemainderRow> rows;
  std::vector<double> x(static_cast<std::size_t>(q.d()));
  for (double delta : delta_grid) {
    const Reparam rep = fiber_point.with_phi(phi0 + delta * direction);
    const FunctionDifference diff(rep.to_theta(), ctx);
    RemainderRow row;
    row.delta = delta;
    if (diff.identically_zero()) {
      row.flagged = true;
      row.R_over_D = std::numeric_limits<double>::quiet_NaN();
      rows.push_back(row);
      continue;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    double sum_r2 = 0.0;
    double sum_d2 = 0.0;
    for (std::size_t s = 0; s < n_mc; ++s) {
      q.sample(rng, x);
      const double f0 = mlp_forward(ctx.theta0, ctx.phi, x);
      const double y = f0 + sigma * noise(rng);
      const double dlt = diff(x);
      const double e = (y - f0) / ctx.sigma2;
      const double ratio_m1 = std::expm1(dlt * e - dlt * dlt / (2.0 * ctx.sigma2));
      const ExpansionTerms terms = lemma1_terms(rep, ctx, x, y);
      const double rem = ratio_m1 - (terms.first + terms.second);
      sum_r2 += rem * rem;
      sum_d2 += std::expm1(dlt * dlt / ctx.sigma2);
    }
    row.R = std::sqrt(sum_r2 / static_cast<double>(n_mc));
    row.D = std::sqrt(sum_d2 / static_cast<double>(n_mc));
    if (row.D > 0.0) {
      row.R_over_D = row.R / row.D;
    } else {
      row.flagged = true;
      row.R_over_D = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Gram matrix of the derivative family

int h3_family_size(int k0, int d) { return k0 * (d * (d + 1) / 2 + d + 2); }

void h3_family_values(const Theta& theta0, const TransferFunction& phi,
                      std::span<const double> x, std::span<double> out) {
  const int d = theta0.d();
  if (x.size() != static_cast<std::size_t>(d) ||
      out.size() != static_cast<std::size_t>(h3_family_size(theta0.k(), d)))
    throw InvalidInput("h3_family_values: size mismatch");
  std::size_t m = 0;
  for (int i = 0; i < theta0.k(); ++i) {
    const double u = pre_activation(theta0, i, x);
    const double p1 = phi.d1(u);
    const double p2 = phi.d2(u);
    for (int k = 0; k < d; ++k)
      for (int l = 0; l <= k; ++l)
        out[m++] = x[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(l)] * p2;
    out[m++] = p2;
    for (int k = 0; k < d; ++k) out[m++] = x[static_cast<std::size_t>(k)] * p1;
    out[m++] = p1;
  }
}

std::vector<std::string> h3_family_labels(int k0, int d) {
  std::vector<std::string> out;
  for (int i = 1; i <= k0; ++i) {
    const std::string u = "(u" + std::to_string(i) + ")";
    for (int k = 1; k <= d; ++k)
      for (int l = 1; l <= k; ++l)
        out.push_back("x" + std::to_string(k) + "*x" + std::to_string(l) + "*phi''" + u);
    out.push_back("phi''" + u);
    for (int k = 1; k <= d; ++k) out.push_back("x" + std::to_string(k) + "*phi'" + u);
    out.push_back("phi'" + u);
  }
  return out;
}

GramReport gram_matrix_H3(const Theta& theta0, const TransferFunction& phi, const GramSpec& spec) {
  spec.input.validate();
  const int d = theta0.d();
  if (spec.input.d() != d) throw InvalidInput("gram_matrix_H3: input dimension mismatch");
  const auto m = static_cast<Eigen::Index>(h3_family_size(theta0.k(), d));

  GramReport rep;
  rep.labels = h3_family_labels(theta0.k(), d);
  rep.gram = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd g(m);
  std::vector<double> x(static_cast<std::size_t>(d));
  auto eval = [&]() { h3_family_values(theta0, phi, x, {g.data(), static_cast<std::size_t>(m)}); };

  if (spec.method == GramMethod::quadrature) {
    if (spec.input.kind != InputKind::gaussian || d > 2)
      throw InvalidInput(
          "gram_matrix_H3: quadrature requires gaussian inputs with d <= 2; use monte_carlo");
    if (spec.n_nodes < 1) throw InvalidInput("gram_matrix_H3: n_nodes must be >= 1");
    std::vector<QuadratureRule> axes;
    for (int l = 0; l < d; ++l)
      axes.push_back(gaussian_expectation_rule(spec.n_nodes, spec.input.p1[static_cast<std::size_t>(l)],
                                               spec.input.p2[static_cast<std::size_t>(l)]));
    const std::size_t per_axis = static_cast<std::size_t>(spec.n_nodes);
    std::size_t total = 1;
    for (int l = 0; l < d; ++l) total *= per_axis;
    for (std::size_t flat = 0; flat < total; ++flat) {
      double weight = 1.0;
      std::size_t rest = flat;
      for (int l = 0; l < d; ++l) {
        const std::size_t node = rest % per_axis;
        rest /= per_axis;
        x[static_cast<std::size_t>(l)] = axes[static_cast<std::size_t>(l)].nodes[node];
        weight *= axes[static_cast<std::size_t>(l)].weights[node];
      }
      if (weight == 0.0) continue;
      eval();
      rep.gram.selfadjointView<Eigen::Lower>().rankUpdate(g, weight);
    }
    rep.gram = rep.gram.selfadjointView<Eigen::Lower>();
  } else {
    if (spec.n_mc < 2) throw InvalidInput("gram_matrix_H3: n_mc must be >= 2");
    std::mt19937_64 rng(spec.seed);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t s = 0; s < spec.n_mc; ++s) {
      spec.input.sample(rng, x);
      eval();
      const Eigen::MatrixXd outer = g * g.transpose();
      rep.gram += outer;
      sum_sq += outer.cwiseProduct(outer);
    }
    const double n = static_cast<double>(spec.n_mc);
    rep.gram /= n;
    const Eigen::MatrixXd var = (sum_sq / n - rep.gram.cwiseProduct(rep.gram)) * (n / (n - 1.0));
    rep.std_error = (var.cwiseMax(0.0) / n).cwiseSqrt();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(rep.gram, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = solver.eigenvalues().minCoeff();
  rep.independent = rep.min_eigenvalue > spec.tolerance;
  return rep;
}

}  // namespace mlpsel
