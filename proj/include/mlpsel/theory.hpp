#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlpsel/input_dist.hpp"
#include "mlpsel/theta.hpp"
#include "mlpsel/transfer.hpp"

namespace mlpsel {

/// True model against which likelihood ratios f_theta / f are taken.
struct RatioContext {
  Theta theta0;
  TransferFunction phi;
  double sigma2 = 1.0;

  void validate() const;
  /// e(z) = (y - F_{theta0}(x)) / sigma2.
  double e(std::span<const double> x, double y) const;
};

/// Regrouping of an overparametrized theta around theta0.
///
/// Units are reordered so that the copies of true unit i occupy positions
/// t[i]..t[i+1]-1 and the surplus units come last. With T = t[k0] and
/// S = k - T, the identifiable block is laid out as
///   phi = (beta, b_0..b_{T-1}, w_0..w_{T-1}, s_0..s_{k0-1}, a_T..a_{k-1})
/// and the non-identifiable block as
///   psi = (q_0..q_{T-1}, b_T..b_{k-1}, w_T..w_{k-1})
/// where s_i = sum_{group i} a_j - a0_i and q_j = a_j / sum_{group i} a_j.
struct Reparam {
  Theta theta0;
  int k = 0;
  std::vector<int> t;
  /// Position j of the regrouped parameter holds unit order[j] of the input.
  std::vector<int> order;
  /// True unit of each matched position j < T.
  std::vector<int> group_of;
  Eigen::VectorXd phi;
  Eigen::VectorXd psi;

  int k0() const { return theta0.k(); }
  int d() const { return theta0.d(); }
  int matched() const { return t.back(); }
  int surplus() const { return k - matched(); }

  Eigen::Index phi_beta() const { return 0; }
  Eigen::Index phi_b(int j) const { return 1 + j; }
  Eigen::Index phi_w(int j, int l) const { return 1 + matched() + j * d() + l; }
  Eigen::Index phi_s(int i) const { return 1 + matched() * (1 + d()) + i; }
  Eigen::Index phi_a(int j) const { return 1 + matched() * (1 + d()) + k0() + (j - matched()); }
  Eigen::Index psi_q(int j) const { return j; }
  Eigen::Index psi_b(int j) const { return matched() + (j - matched()); }
  Eigen::Index psi_w(int j, int l) const {
    return matched() + surplus() + (j - matched()) * d() + l;
  }

  /// Phi at the fiber: true biases and weights repeated per group, zeros for
  /// s and the surplus output weights.
  Eigen::VectorXd phi_at_fiber() const;
  std::vector<std::string> phi_labels() const;
  /// Parameter (in regrouped unit order) described by (phi, psi).
  Theta to_theta() const;
  Reparam with_phi(Eigen::VectorXd new_phi) const;
};

/// Groups each unit of theta with the nearest true unit in (b, w) when that
/// distance is <= match_tol; remaining units are surplus.
Reparam build_reparam(const Theta& theta, const Theta& theta0, double match_tol = 1e-6);

/// f_theta(z) / f_{theta0}(z) = exp(Delta e(z) - Delta^2 / (2 sigma2)),
/// Delta = F_theta(x) - F_{theta0}(x).
double density_ratio(const Theta& theta, const RatioContext& ctx, std::span<const double> x,
                     double y);

/// F_theta - F_{theta0} with units sharing identical (b, w) merged first, so
/// that points on the fiber give exactly zero.
class FunctionDifference {
 public:
  FunctionDifference(const Theta& theta, const RatioContext& ctx);
  double operator()(std::span<const double> x) const;
  /// True when the merged difference has no nonzero coefficient.
  bool identically_zero() const { return constant_ == 0.0 && terms_.empty(); }

 private:
  struct Term {
    double coef;
    double b;
    std::vector<double> w;
  };
  TransferFunction phi_;
  double constant_ = 0.0;
  std::vector<Term> terms_;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;
};

/// D = || f_theta/f - 1 ||_{L2(f)} = sqrt(E_x[exp(Delta(x)^2/sigma2)] - 1),
/// inner y-integral in closed form, outer expectation by Monte Carlo over q.
McEstimate d_norm(const Theta& theta, const RatioContext& ctx, const InputDist& q,
                  std::size_t n_mc, std::uint64_t seed);

/// s_theta(z) = (f_theta/f(z) - 1) / d_value.
double score_s(const Theta& theta, const RatioContext& ctx, std::span<const double> x, double y,
               double d_value);

struct ExpansionTerms {
  /// (Phi - Phi0)^T f'(z).
  double first = 0.0;
  /// 0.5 (Phi - Phi0)^T f''(z) (Phi - Phi0).
  double second = 0.0;
  double value() const { return 1.0 + first + second; }
};

/// Second-order expansion of f_theta/f in Phi around the fiber point
/// (Phi0, psi) of rep. The first-order term is the linear score; the second
/// follows from expanding exp(Delta e - Delta^2/(2 sigma2)):
///   Phi'' term = Delta2 e + Delta1^2 (e^2 - 1/sigma2).
ExpansionTerms lemma1_terms(const Reparam& rep, const RatioContext& ctx,
                            std::span<const double> x, double y);
double lemma1_expansion(const Reparam& rep, const RatioContext& ctx, std::span<const double> x,
                        double y);

struct RemainderRow {
  double delta = 0.0;
  double D = 0.0;
  double R = 0.0;
  double R_over_D = 0.0;
  bool flagged = false;
};

/// For each delta: Phi = Phi0 + delta * direction (psi from fiber_point),
/// R = || ratio - expansion ||_{L2(f)} and D by Monte Carlo with the same
/// draws for every delta. Rows with D = 0 are flagged and carry R/D = NaN.
std::vector<RemainderRow> expansion_remainder_study(const Reparam& fiber_point,
                                                    const Eigen::VectorXd& direction,
                                                    const std::vector<double>& delta_grid,
                                                    const RatioContext& ctx, const InputDist& q,
                                                    std::size_t n_mc, std::uint64_t seed);

enum class GramMethod { quadrature, monte_carlo };

struct GramSpec {
  InputDist input;
  GramMethod method = GramMethod::quadrature;
  /// Gauss-Hermite nodes per axis.
  int n_nodes = 200;
  std::size_t n_mc = 1'000'000;
  std::uint64_t seed = 1;
  /// Independence verdict threshold on the smallest eigenvalue.
  double tolerance = 1e-8;
};

struct GramReport {
  Eigen::MatrixXd gram;
  /// Entrywise Monte Carlo standard errors; empty for quadrature.
  Eigen::MatrixXd std_error;
  double min_eigenvalue = 0.0;
  bool independent = false;
  std::vector<std::string> labels;
};

/// Number of functions in the derivative family for (k0, d).
int h3_family_size(int k0, int d);
/// Values at x of the family, per true unit i:
///   x_k x_l phi''(u_i) (1 <= l <= k <= d), phi''(u_i), x_k phi'(u_i), phi'(u_i)
/// with u_i = b0_i + w0_i^T x.
void h3_family_values(const Theta& theta0, const TransferFunction& phi,
                      std::span<const double> x, std::span<double> out);
std::vector<std::string> h3_family_labels(int k0, int d);

/// Gram matrix E_q[g_u(X) g_v(X)] of the family and its smallest eigenvalue.
/// Quadrature needs gaussian inputs with d <= 2.
GramReport gram_matrix_H3(const Theta& theta0, const TransferFunction& phi, const GramSpec& spec);

}  // namespace mlpsel
