#pragma once

// Reference computations for the tests. They deliberately avoid the library's
// evaluation paths: plain loops, direct densities, brute-force sampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mlpsel/theta.hpp"
#include "mlpsel/transfer.hpp"

namespace oracle {

using mlpsel::Dataset;
using mlpsel::Theta;
using mlpsel::TransferKind;

inline double act(TransferKind kind, double u) {
  return kind == TransferKind::tanh ? std::tanh(u) : 1.0 / (1.0 + std::exp(-u));
}

inline double forward(const Theta& th, TransferKind kind, std::span<const double> x) {
  double f = th.beta();
  for (int i = 0; i < th.k(); ++i) {
    double u = th.b(i);
    for (int l = 0; l < th.d(); ++l) u += th.w(i, l) * x[static_cast<std::size_t>(l)];
    f += th.a(i) * act(kind, u);
  }
  return f;
}

inline double normal_pdf(double y, double mean, double var) {
  return std::exp(-(y - mean) * (y - mean) / (2.0 * var)) /
         std::sqrt(2.0 * std::numbers::pi * var);
}

/// Sum of log N(y_i; F(x_i), sigma2), evaluated from the density itself.
inline double loglik(const Theta& th, TransferKind kind, double sigma2, const Dataset& data) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < data.n(); ++i)
    acc += std::log(normal_pdf(data.y(i), forward(th, kind, data.x(i)), sigma2));
  return static_cast<double>(acc);
}

/// Central differences with a step scaled to each coordinate.
template <class F>
Eigen::VectorXd central_gradient(F&& f, const Eigen::VectorXd& v, double h = 1e-5) {
  Eigen::VectorXd g(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double step = h * std::max(1.0, std::abs(v[j]));
    Eigen::VectorXd up = v;
    Eigen::VectorXd dn = v;
    up[j] += step;
    dn[j] -= step;
    g[j] = (f(up) - f(dn)) / (2.0 * step);
  }
  return g;
}

/// Largest violation of |g - ref| <= rtol * max(|g|, |ref|) + atol; <= 0 passes.
inline double gradient_violation(const Eigen::VectorXd& g, const Eigen::VectorXd& ref,
                                 double rtol, double atol) {
  double worst = -1.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double allowed = rtol * std::max(std::abs(g[j]), std::abs(ref[j])) + atol;
    worst = std::max(worst, std::abs(g[j] - ref[j]) - allowed);
  }
  return worst;
}

/// Exhaustive search over a 21-point grid per axis of the k = 1, d = 1 set
/// {|beta|, |a| <= B, 0 <= b <= B, eta <= |w| <= B} for the tanh model.
inline double grid_search_k1(const Dataset& data, double sigma2, double B, double eta,
                             int points = 21) {
  auto lin = [](double lo, double hi, int m) {
    std::vector<double> v(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (m - 1);
    return v;
  };
  const auto beta = lin(-B, B, points);
  const auto a = lin(-B, B, points);
  const auto b = lin(0.0, B, points);
  std::vector<double> w = lin(eta, B, points / 2 + 1);
  for (double v : lin(eta, B, points / 2)) w.push_back(-v);

  const double c = -0.5 * std::log(2.0 * std::numbers::pi * sigma2);
  double best = -INFINITY;
  std::vector<double> h(data.n());
  for (double bb : b) {
    for (double ww : w) {
      for (std::size_t i = 0; i < data.n(); ++i) h[i] = std::tanh(bb + ww * data.x(i)[0]);
      for (double aa : a) {
        for (double be : beta) {
          double sse = 0.0;
          for (std::size_t i = 0; i < data.n(); ++i) {
            const double r = data.y(i) - be - aa * h[i];
            sse += r * r;
          }
          best = std::max(best, static_cast<double>(data.n()) * c - sse / (2.0 * sigma2));
        }
      }
    }
  }
  return best;
}

struct Estimate {
  double value;
  double std_error;
};

/// D = ||f_theta/f - 1|| by sampling (x, y) from the true model and averaging
/// the squared deviation of the plain density quotient. Standard normal x.
inline Estimate d_norm_brute_force(const Theta& th, const Theta& th0, TransferKind kind,
                                   double sigma2, std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const double sd = std::sqrt(sigma2);
  std::vector<double> x(static_cast<std::size_t>(th0.d()));
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t m = 0; m < draws; ++m) {
    for (double& v : x) v = z(rng);
    const double f0 = forward(th0, kind, x);
    const double y = f0 + sd * z(rng);
    const double q = normal_pdf(y, forward(th, kind, x), sigma2) / normal_pdf(y, f0, sigma2);
    const double v = (q - 1.0) * (q - 1.0);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(draws);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq / n - mean * mean) * n / (n - 1.0));
  const double d = std::sqrt(mean);
  // delta method for the square root
  return {d, d > 0.0 ? std::sqrt(var / n) / (2.0 * d) : 0.0};
}

/// Random parameter with coordinates in [-scale, scale], biases made
/// nonnegative and input-weight norms at least 0.3.
inline Theta random_theta(std::mt19937_64& rng, int k, int d, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Theta th(k, d);
  for (Eigen::Index j = 0; j < th.values().size(); ++j) th.values()[j] = u(rng);
  for (int i = 0; i < k; ++i) {
    th.b(i) = std::abs(th.b(i));
    double norm = 0.0;
    for (int l = 0; l < d; ++l) norm += th.w(i, l) * th.w(i, l);
    if (std::sqrt(norm) < 0.3) th.w(i, 0) = th.w(i, 0) < 0 ? -0.3 : 0.3;
  }
  return th;
}

inline Dataset random_data(std::mt19937_64& rng, int d, std::size_t n, double scale = 2.0) {
  std::normal_distribution<double> z(0.0, 1.0);
  mlpsel::RowMatrix X(static_cast<Eigen::Index>(n), d);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (int l = 0; l < d; ++l) X(i, l) = scale * z(rng);
    y[i] = scale * z(rng);
  }
  return Dataset(std::move(X), std::move(y));
}

}  // namespace oracle
