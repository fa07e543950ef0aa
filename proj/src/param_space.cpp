#include "mlpsel/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mlpsel/errors.hpp"

namespace mlpsel {

namespace {

double w_norm(const Theta& theta, int i) {
  double s = 0.0;
  for (double v : theta.w_row(i)) s += v * v;
  return std::sqrt(s);
}

}  // namespace

void ThetaSpace::validate() const {
  if (k < 1 || d < 1) throw ConfigError("ThetaSpace: k and d must be >= 1");
  if (!(bound > 0.0) || !std::isfinite(bound)) throw ConfigError("ThetaSpace: bound must be > 0");
  if (!(eta > 0.0)) throw ConfigError("ThetaSpace: eta must be > 0");
  if (eta > bound * std::sqrt(static_cast<double>(d)))
    throw ConfigError("ThetaSpace: eta = " + std::to_string(eta) +
                      " exceeds bound*sqrt(d); the constraint set is empty");
}

double ThetaSpace::lower(std::size_t index) const {
  const auto first_b = static_cast<std::size_t>(1 + k);
  const auto past_b = static_cast<std::size_t>(1 + 2 * k);
  if (sign_convention && index >= first_b && index < past_b) return 0.0;
  return -bound;
}

bool ThetaSpace::contains(const Theta& theta, double tol) const {
  if (theta.k() != k || theta.d() != d) return false;
  const auto& v = theta.values();
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (!std::isfinite(v[j])) return false;
    if (v[j] < lower(static_cast<std::size_t>(j)) - tol || v[j] > bound + tol) return false;
  }
  for (int i = 0; i < k; ++i)
    if (w_norm(theta, i) < eta - tol) return false;
  return true;
}

Theta project(const Theta& theta, const ThetaSpace& space) {
  space.validate();
  if (theta.k() != space.k || theta.d() != space.d)
    throw InvalidInput("project: parameter shape does not match the space");
  Theta out = theta;
  auto& v = out.values();
  for (Eigen::Index j = 0; j < v.size(); ++j)
    v[j] = std::clamp(v[j], space.lower(static_cast<std::size_t>(j)), space.bound);

  for (int i = 0; i < space.k; ++i) {
    const double norm = w_norm(out, i);
    if (norm >= space.eta) continue;
    auto w = out.w_row(i);
    if (norm == 0.0) {
      std::fill(w.begin(), w.end(), 0.0);
      w[0] = space.eta;
    } else {
      const double scale = space.eta / norm;
      for (double& c : w) c *= scale;
    }
    // With d > 1 and eta > bound a rescaled coordinate can leave the box;
    // clip it and raise the remaining coordinates until the norm is eta.
    for (double& c : w) c = std::clamp(c, -space.bound, space.bound);
    for (double& c : w) {
      const double n2 = std::pow(w_norm(out, i), 2);
      if (n2 >= space.eta * space.eta) break;
      const double target = std::min(space.bound, std::sqrt(space.eta * space.eta - n2 + c * c));
      c = (c < 0.0 ? -target : target);
    }
    // Rounding can leave the norm an ulp short of eta, which would break
    // idempotence; nudge the largest coordinate outward.
    auto largest = std::max_element(w.begin(), w.end(),
                                    [](double x, double y) { return std::abs(x) < std::abs(y); });
    while (w_norm(out, i) < space.eta && std::abs(*largest) < space.bound)
      *largest = std::nextafter(*largest, *largest < 0.0 ? -space.bound : space.bound);
  }
  return out;
}

Theta sample_init(const ThetaSpace& space, std::uint64_t seed) {
  space.validate();
  std::mt19937_64 rng(seed);
  Theta theta(space.k, space.d);
  auto& v = theta.values();
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    std::uniform_real_distribution<double> u(space.lower(static_cast<std::size_t>(j)), space.bound);
    v[j] = u(rng);
  }
  return project(theta, space);
}

Theta nonident_witness(const Theta& theta0, const SplitPlan& plan) {
  const int k0 = theta0.k();
  const int d = theta0.d();
  if (static_cast<int>(plan.proportions.size()) != k0)
    throw InvalidInput("nonident_witness: need one proportion list per true unit");
  if (plan.surplus_b.size() != plan.surplus_w.size())
    throw InvalidInput("nonident_witness: surplus b and w lists differ in length");

  int k = static_cast<int>(plan.surplus_b.size());
  for (const auto& group : plan.proportions) {
    if (group.empty()) throw InvalidInput("nonident_witness: empty group");
    double sum = 0.0;
    for (double q : group) {
      if (!(q > 0.0)) throw InvalidInput("nonident_witness: proportions must be positive");
      sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InvalidInput("nonident_witness: proportions must sum to 1");
    k += static_cast<int>(group.size());
  }
  if (k <= k0) throw InvalidInput("nonident_witness: requires k > k0");

  Theta theta(k, d);
  theta.beta() = theta0.beta();
  int j = 0;
  for (int i = 0; i < k0; ++i) {
    for (double q : plan.proportions[static_cast<std::size_t>(i)]) {
      theta.a(j) = q * theta0.a(i);
      theta.b(j) = theta0.b(i);
      for (int l = 0; l < d; ++l) theta.w(j, l) = theta0.w(i, l);
      ++j;
    }
  }
  for (std::size_t s = 0; s < plan.surplus_b.size(); ++s, ++j) {
    if (static_cast<int>(plan.surplus_w[s].size()) != d)
      throw InvalidInput("nonident_witness: surplus weight has wrong dimension");
    theta.a(j) = 0.0;
    theta.b(j) = plan.surplus_b[s];
    for (int l = 0; l < d; ++l) theta.w(j, l) = plan.surplus_w[s][static_cast<std::size_t>(l)];
  }
  return theta;
}

Theta nonident_witness(const Theta& theta0, int k, std::uint64_t split_seed,
                       const ThetaSpace& space_hint) {
  const int k0 = theta0.k();
  if (k <= k0)
    throw InvalidInput("nonident_witness: k = " + std::to_string(k) + " must exceed k0 = " +
                       std::to_string(k0));
  ThetaSpace space = space_hint;
  space.k = 1;
  space.d = theta0.d();
  space.validate();

  std::mt19937_64 rng(split_seed);
  std::vector<int> copies(static_cast<std::size_t>(k0), 1);
  int surplus = 0;
  std::bernoulli_distribution duplicate(0.5);
  std::uniform_int_distribution<int> pick(0, k0 - 1);
  for (int extra = 0; extra < k - k0; ++extra) {
    if (duplicate(rng))
      ++copies[static_cast<std::size_t>(pick(rng))];
    else
      ++surplus;
  }

  SplitPlan plan;
  std::uniform_real_distribution<double> raw(0.1, 1.0);
  for (int i = 0; i < k0; ++i) {
    std::vector<double> q(static_cast<std::size_t>(copies[static_cast<std::size_t>(i)]));
    double sum = 0.0;
    for (double& v : q) sum += (v = raw(rng));
    for (double& v : q) v /= sum;
    // Renormalized entries can miss 1 by an ulp; fold the slack into the last.
    double head = 0.0;
    for (std::size_t s = 0; s + 1 < q.size(); ++s) head += q[s];
    q.back() = 1.0 - head;
    plan.proportions.push_back(std::move(q));
  }
  for (int s = 0; s < surplus; ++s) {
    const Theta unit = sample_init(space, rng());
    plan.surplus_b.push_back(unit.b(0));
    plan.surplus_w.emplace_back(unit.w_row(0).begin(), unit.w_row(0).end());
  }

  // Shuffle so duplicated and surplus units are not always contiguous.
  Theta ordered = nonident_witness(theta0, plan);
  std::vector<int> order(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) order[static_cast<std::size_t>(j)] = j;
  std::shuffle(order.begin(), order.end(), rng);
  return ordered.permuted(order);
}

}  // namespace mlpsel
